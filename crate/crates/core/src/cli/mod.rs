//! Command line front end: file formats, run orchestration, output.

pub mod dimacs;
pub mod emit;
pub mod graph_io;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assignment::PartialAssignment;
use crate::dist::{run_parallel, StackMode, StackPolicy};
use crate::encode::{cnf_to_model, load_aux_model, Cnf, SymmetryModel, ValueMode};
use crate::engine::{run_sequential, PrefixPlan, RunStats};
use crate::error::{Error, Result};
use crate::gen::{gen_a000088, gen_ccp, gen_ramsey, gen_tensor, Instance};
use crate::oracle::{burnside_graph_count, exact_cover_check, orbit_classes};

pub use dimacs::{emit_dimacs, emit_prefix, parse_dimacs, parse_prefix};
pub use emit::{emit_outputs, OutputFormat};
pub use graph_io::{emit_graph, parse_graph};

#[derive(Debug, Parser)]
#[command(
    name = "symred",
    version,
    about = "Generates one prefix assignment per symmetry class",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// DIMACS CNF file
    input: Option<PathBuf>,
    /// Symmetry graph; its first vertices are the variables
    #[arg(long)]
    graph: Option<PathBuf>,
    /// File of 1-based prefix variables
    #[arg(long, conflicts_with = "prefix_vars")]
    prefix: Option<PathBuf>,
    /// Comma-separated 1-based prefix variables
    #[arg(long, value_delimiter = ',')]
    prefix_vars: Option<Vec<usize>>,
    /// Use only the first k prefix variables
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value = "global")]
    value_mode: ValueMode,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// cubes, icnf, sbp or count
    #[arg(long, default_value = "cubes")]
    output: OutputFormat,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// master or hier
    #[arg(long, default_value = "master")]
    stack: StackMode,
    /// Last level handled by the low-level workers in hier mode
    #[arg(long, default_value_t = 1)]
    hier_threshold: usize,
    /// Per-level accepted counts on stderr
    #[arg(long)]
    stats: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Writes an instance as BASE.cnf, BASE.prefix and, if any, BASE.graph
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Output base name; defaults to one derived from the parameters
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Compares the generated assignments with brute-force orbit enumeration
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        /// Also print the number of unlabeled graphs on this many nodes
        #[arg(long)]
        burnside: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum Family {
    /// Rank-r decomposition of a random m x m x m 0/1 tensor
    Tensor {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        ones: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Clique coloring: t-colorable graph on n nodes containing K_s
    Ccp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
    },
    /// Two-colorings of K_n without a monochromatic K_k
    Ramsey {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// All graphs on n nodes
    A000088 {
        #[arg(long)]
        n: usize,
    },
}

/// A loaded problem: formula, model and prefix.
pub struct Problem {
    pub cnf: Cnf,
    pub model: SymmetryModel,
    pub prefix: Vec<usize>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load(args: &InputArgs) -> Result<Problem> {
    let input = args
        .input
        .as_ref()
        .ok_or_else(|| Error::input("no input CNF given"))?;
    let cnf = parse_dimacs(&read(input)?)?;
    let model = match &args.graph {
        Some(p) => load_aux_model(&parse_graph(&read(p)?)?, cnf.num_vars, args.value_mode, 2)?,
        None => cnf_to_model(&cnf, args.value_mode)?,
    };
    let mut prefix = match (&args.prefix, &args.prefix_vars) {
        (Some(p), _) => parse_prefix(&read(p)?, cnf.num_vars)?,
        (None, Some(vs)) => {
            let text: Vec<String> = vs.iter().map(usize::to_string).collect();
            parse_prefix(text.join(" ").as_bytes(), cnf.num_vars)?
        }
        (None, None) => return Err(Error::input("no prefix given (--prefix or --prefix-vars)")),
    };
    if let Some(k) = args.depth {
        if k > prefix.len() {
            return Err(Error::input(format!(
                "depth {k} exceeds prefix length {}",
                prefix.len()
            )));
        }
        prefix.truncate(k);
    }
    Ok(Problem { cnf, model, prefix })
}

/// Result of a run: assignments in canonical order and statistics.
pub struct Solved {
    pub assignments: Vec<PartialAssignment>,
    pub stats: RunStats,
    pub messages: Option<u64>,
}

pub fn solve(p: &Problem, workers: usize, policy: StackPolicy) -> Result<Solved> {
    let plan = PrefixPlan::build(&p.model, &p.prefix)?;
    if workers == 1 && policy.mode == StackMode::Master {
        let mut out = run_sequential(&p.model, &plan)?;
        out.assignments.sort_unstable();
        return Ok(Solved {
            assignments: out.assignments,
            stats: out.stats,
            messages: None,
        });
    }
    let out = run_parallel(&p.model, &plan, policy, workers)?;
    Ok(Solved {
        assignments: out.assignments,
        stats: out.stats.run,
        messages: Some(out.stats.messages),
    })
}

fn write_stats(err: &mut dyn Write, s: &Solved) -> Result<()> {
    for (l, n) in s.stats.accepted_profile().iter().enumerate() {
        writeln!(err, "{}\t{n}", l + 1)?;
    }
    let popped: u64 = s.stats.levels.iter().map(|l| l.popped).sum();
    let t1: u64 = s.stats.levels.iter().map(|l| l.rejected_t1).sum();
    let t2: u64 = s.stats.levels.iter().map(|l| l.rejected_t2).sum();
    writeln!(err, "c popped\t{popped}")?;
    writeln!(err, "c rejected_t1\t{t1}")?;
    writeln!(err, "c rejected_t2\t{t2}")?;
    if let Some(m) = s.messages {
        writeln!(err, "c messages\t{m}")?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn gen(family: &Family, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let (inst, base): (Instance, String) = match *family {
        Family::Tensor { m, r, ones, seed } => {
            (gen_tensor(m, r, ones, seed)?, format!("tensor{m}_{r}"))
        }
        Family::Ccp { n, s, t } => (gen_ccp(n, s, t)?, format!("ccp{n}_{s}_{t}")),
        Family::Ramsey { n, k } => (gen_ramsey(n, k)?, format!("ramsey{n}_{k}")),
        Family::A000088 { n } => (gen_a000088(n)?, format!("a{n}")),
    };
    let base = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(base));
    let with = |ext: &str| {
        let mut p = base.clone().into_os_string();
        p.push(ext);
        PathBuf::from(p)
    };
    write_file(&with(".cnf"), &emit_dimacs(&inst.cnf))?;
    write_file(&with(".prefix"), &emit_prefix(&inst.prefix))?;
    if let Some(g) = &inst.aux {
        write_file(&with(".graph"), &emit_graph(g))?;
    }
    writeln!(
        stdout,
        "c {}: {} vars, {} clauses, prefix {}",
        inst.meta,
        inst.cnf.num_vars,
        inst.cnf.clauses.len(),
        inst.prefix.len()
    )?;
    Ok(())
}

fn oracle(input: &InputArgs, burnside: Option<usize>, stdout: &mut dyn Write) -> Result<bool> {
    if let Some(n) = burnside {
        writeln!(stdout, "burnside\t{}", burnside_graph_count(n)?)?;
    }
    let p = load(input)?;
    let classes = orbit_classes(&p.model, &p.prefix)?;
    let s = solve(&p, 1, StackPolicy::master())?;
    let r = exact_cover_check(&s.assignments, &classes);
    writeln!(stdout, "orbits\t{}", r.orbits)?;
    writeln!(stdout, "emitted\t{}", r.emitted)?;
    for x in &r.missing {
        writeln!(stdout, "missing\t{x}")?;
    }
    for (x, h) in &r.repeated {
        writeln!(stdout, "repeated\t{x}\t{h}")?;
    }
    for x in &r.malformed {
        writeln!(stdout, "malformed\t{x}")?;
    }
    writeln!(
        stdout,
        "cover\t{}",
        if r.passed() { "pass" } else { "fail" }
    )?;
    Ok(r.passed())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Some(Command::Gen { family, out }) => {
            gen(&family, out.as_deref(), stdout)?;
            Ok(0)
        }
        Some(Command::Oracle { input, burnside }) => {
            // a failed cover is a defect of the generator, not of the input
            Ok(if oracle(&input, burnside, stdout)? {
                0
            } else {
                2
            })
        }
        None => {
            let p = load(&cli.input)?;
            let policy = match cli.run.stack {
                StackMode::Master => StackPolicy::master(),
                StackMode::Hierarchical => StackPolicy::hierarchical(cli.run.hier_threshold),
            };
            let s = solve(&p, cli.run.workers, policy)?;
            stdout.write_all(emit_outputs(&p.cnf, &s.assignments, cli.run.output).as_bytes())?;
            if cli.run.stats {
                write_stats(stderr, &s)?;
            }
            Ok(0)
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit status: 0 success, 1 input error, 2 internal invariant violation.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "symred: {e}");
            e.exit_code()
        }
    }
}
