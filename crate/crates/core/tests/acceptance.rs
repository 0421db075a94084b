//! Acceptance suite. Each test prints one `criterion N ... PASS|FAIL` line.
//! Tests take a shared lock so their timings do not overlap.

use std::io::Write;
use std::sync::mpsc;
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symred::assignment::PartialAssignment;
use symred::canon::{canonical_form, ColoredGraph};
use symred::cli;
use symred::dist::{run_parallel, StackPolicy};
use symred::encode::{
    cnf_to_model, load_aux_model, model_symmetries, Cnf, SymmetryModel, ValueMode,
};
use symred::engine::{
    expand, run_sequential, test_t1, test_t2, PrefixPlan, RunOutput, RunStats, WorkItem,
};
use symred::gen::{gen_a000088, gen_ccp, gen_ramsey, gen_tensor};
use symred::oracle::{
    burnside_graph_count, exact_cover_check, orbit_classes, orbit_count_exhaustive,
};
use symred::perm::{group_closure, orbit, Permutation};
use symred::wreath::WreathElement;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Written to the process stdout directly, so the line shows up even when
/// the harness captures test output.
fn report(n: u32, what: &str, pass: bool, detail: &str, elapsed: Duration) {
    let line = format!(
        "criterion {n:>2} {what}: {} ({detail}; {:.2}s)\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn intro_cnf() -> Cnf {
    Cnf::new(6, vec![vec![1, 2], vec![1, -3, -5], vec![2, -4, -6]]).unwrap()
}

fn run(m: &SymmetryModel, prefix: &[usize]) -> RunOutput {
    let plan = PrefixPlan::build(m, prefix).unwrap();
    run_sequential(m, &plan).unwrap()
}

/// Level-by-level comparison; empty when equal.
fn profile_diff(got: &[u64], want: &[u64]) -> Vec<String> {
    (0..want.len())
        .filter(|&i| got.get(i) != Some(&want[i]))
        .map(|i| format!("level {}: got {:?}, want {}", i + 1, got.get(i), want[i]))
        .collect()
}

#[test]
fn criterion_01_intro_example() {
    let _g = serial();
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("intro.cnf");
    std::fs::write(&path, cli::emit_dimacs(&intro_cnf())).unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        ["symred", path.to_str().unwrap(), "--prefix-vars", "1,2"],
        &mut out,
        &mut err,
    );
    let text = String::from_utf8(out).unwrap();
    let cubes: Vec<PartialAssignment> = text
        .lines()
        .map(|l| {
            let lits: Vec<i64> = l
                .strip_prefix("a ")
                .unwrap()
                .split_whitespace()
                .map(|x| x.parse().unwrap())
                .take_while(|&x| x != 0)
                .collect();
            PartialAssignment::from_pairs(
                lits.iter()
                    .map(|&l| (l.unsigned_abs() as usize - 1, usize::from(l > 0))),
            )
            .unwrap()
        })
        .collect();
    let m = cnf_to_model(&intro_cnf(), ValueMode::Global).unwrap();
    let classes = orbit_classes(&m, &[0, 1]).unwrap();
    let cover = exact_cover_check(&cubes, &classes);
    let elapsed = t.elapsed();
    let pass = code == 0
        && cubes.len() == 3
        && classes.count() == 3
        && cover.passed()
        && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        "intro example, prefix x1,x2",
        pass,
        &format!(
            "{} cubes, {} orbits, cover {}",
            cubes.len(),
            classes.count(),
            cover.passed()
        ),
        elapsed,
    );
    assert!(pass, "{cover:?}");
}

#[test]
fn criterion_02_tree_eliminations() {
    let _g = serial();
    let t = Instant::now();
    let m = cnf_to_model(&intro_cnf(), ValueMode::Global).unwrap();
    let prefix = [2, 3, 4, 5];
    let plan = PrefixPlan::build(&m, &prefix).unwrap();
    let leaves = run_sequential(&m, &plan).unwrap().assignments.len();
    let orbits = orbit_count_exhaustive(&m, &prefix).unwrap();

    let mut stats = RunStats::new(plan.depth());
    let root = expand(&WorkItem::root(&plan), &plan, &m, &mut stats).unwrap();
    let not_x3 = PartialAssignment::from_pairs([(2, 0)]).unwrap();
    let node = root
        .children
        .iter()
        .find(|c| c.assignment == not_x3)
        .unwrap();
    let level1 = expand(node, &plan, &m, &mut stats).unwrap();
    let aut = level1.children[0].parent_aut.clone();

    // x3 false, x6 false: the orbit of x6 is {x4, x6}
    let mut x6_orbit = orbit(&aut, 5);
    x6_orbit.sort_unstable();
    let t2_item = WorkItem {
        id: 0,
        assignment: not_x3.with(5, 0),
        level: 2,
        p: Some(5),
        parent_aut: aut.clone(),
    };
    let t2_rejects = !test_t2(&t2_item, &m) && x6_orbit == vec![3, 5];
    let t2_not_created = !level1.children.iter().any(|c| c.p == Some(5));

    // x3 false, x4 true: created, then rejected by the acceptance test
    let x34 = not_x3.with(3, 1);
    let t1_item = level1.children.iter().find(|c| c.assignment == x34);
    let t1 = t1_item.map(|it| test_t1(it, &plan, &m).unwrap());
    let t1_rejects = t1
        .as_ref()
        .is_some_and(|o| !o.accepted && o.selected == Some(2));

    let elapsed = t.elapsed();
    let pass = leaves == orbits
        && t2_rejects
        && t2_not_created
        && t1_rejects
        && elapsed.as_secs_f64() < 1.0;
    report(
        2,
        "tree eliminations, prefix x3..x6",
        pass,
        &format!(
            "leaves {leaves}, orbits {orbits}; x6 orbit {x6_orbit:?}, second-test rejection {t2_rejects}; \
             first-test rejection of ~x3 x4 {t1_rejects}"
        ),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn criterion_03_graph_counts_small() {
    let _g = serial();
    let t = Instant::now();
    let mut got = Vec::new();
    let mut want = Vec::new();
    for n in 4..=7 {
        let inst = gen_a000088(n).unwrap();
        let m = inst.model(ValueMode::Global).unwrap();
        got.push(run(&m, &inst.prefix).assignments.len() as u128);
        want.push(burnside_graph_count(n).unwrap());
    }
    let pass = got == want && want == [11, 34, 156, 1044];
    report(
        3,
        "graph counts n=4..7",
        pass,
        &format!("got {got:?}, want {want:?}"),
        t.elapsed(),
    );
    assert!(pass);
}

struct Nine {
    count: usize,
    profile: Vec<u64>,
    elapsed: Duration,
}

fn nine() -> &'static Nine {
    static NINE: OnceLock<Nine> = OnceLock::new();
    NINE.get_or_init(|| {
        let t = Instant::now();
        let inst = gen_a000088(9).unwrap();
        let m = inst.model(ValueMode::Global).unwrap();
        let out = run(&m, &inst.prefix);
        Nine {
            count: out.assignments.len(),
            profile: out.stats.accepted_profile(),
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn criterion_03_graph_count_nine() {
    let _g = serial();
    let r = nine();
    let pass = r.count == 274_668 && r.elapsed <= Duration::from_secs(30 * 60);
    report(
        3,
        "graph count n=9",
        pass,
        &format!("got {}, want 274668", r.count),
        r.elapsed,
    );
    assert!(pass);
}

#[test]
fn criterion_04_profile_nine() {
    let _g = serial();
    let r = nine();
    let want = [2u64, 3, 4, 5, 6, 7, 8, 9, 42, 120];
    let diff = profile_diff(&r.profile, &want);
    let pass = diff.is_empty();
    let detail = if pass {
        format!("levels 1..10 = {:?}", &r.profile[..10])
    } else {
        diff.join("; ")
    };
    report(4, "prefix profile n=9", pass, &detail, r.elapsed);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_05_ramsey_profile() {
    let _g = serial();
    let t = Instant::now();
    let inst = gen_ramsey(18, 4).unwrap();
    let m = inst.model(ValueMode::Global).unwrap();
    let out = run(&m, &inst.prefix[..18]);
    let elapsed = t.elapsed();
    let profile = out.stats.accepted_profile();
    let mut want: Vec<u64> = (2..=18).collect();
    want.push(96);
    let diff = profile_diff(&profile, &want);
    let pass = diff.is_empty() && elapsed <= Duration::from_secs(10 * 60);
    let detail = if diff.is_empty() {
        format!("levels 1..18 = {profile:?}")
    } else {
        diff.join("; ")
    };
    report(5, "ramsey R(4,4;18) depth 18", pass, &detail, elapsed);
    assert!(pass, "{detail}");
}

/// Random aux graph whose first `nv` vertices are the variables.
fn random_aux(rng: &mut ChaCha8Rng) -> (ColoredGraph, usize) {
    let n = rng.gen_range(1..=8);
    let nv = rng.gen_range(1..=n);
    let var_colors = rng.gen_range(1..=2);
    let density = [0.0, 0.3, 0.5, 0.8][rng.gen_range(0..4)];
    let colors: Vec<u32> = (0..n)
        .map(|v| {
            if v < nv {
                rng.gen_range(0..var_colors)
            } else {
                2 + rng.gen_range(0..2)
            }
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    (ColoredGraph::new(colors, edges).unwrap(), nv)
}

#[test]
fn criterion_06_exactly_once() {
    let _g = serial();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let mut runs = 0;
    for case in 0..50 {
        let (g, nv) = random_aux(&mut rng);
        let k = rng.gen_range(0..=nv.min(4));
        let mut vars: Vec<usize> = (0..nv).collect();
        for i in 0..k {
            let j = rng.gen_range(i..nv);
            vars.swap(i, j);
        }
        let prefix = &vars[..k];
        for mode in [ValueMode::Global, ValueMode::Phase] {
            let m = load_aux_model(&g, nv, mode, 2).unwrap();
            let classes = orbit_classes(&m, prefix).unwrap();
            let out = run(&m, prefix);
            let r = exact_cover_check(&out.assignments, &classes);
            runs += 1;
            if !r.passed() {
                failures.push(format!("case {case} {mode:?} prefix {prefix:?}: {r:?}"));
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed <= Duration::from_secs(120);
    report(
        6,
        "exactly one assignment per orbit",
        pass,
        &format!("{runs} runs on 50 models, {} failures", failures.len()),
        elapsed,
    );
    assert!(pass, "{failures:#?}");
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, max_colors: u32) -> ColoredGraph {
    let n = rng.gen_range(1..=max_n);
    let colors: Vec<u32> = (0..n).map(|_| rng.gen_range(0..max_colors)).collect();
    let density = rng.gen_range(0.0..1.0);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    ColoredGraph::new(colors, edges).unwrap()
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        images.swap(i, rng.gen_range(0..=i));
    }
    Permutation::from_images(images).unwrap()
}

fn brute_force_aut_count(g: &ColoredGraph) -> usize {
    let n = g.n();
    let mut images: Vec<usize> = (0..n).collect();
    let mut count = 0;
    loop {
        let ok = (0..n).all(|v| g.color(images[v]) == g.color(v))
            && (0..n)
                .all(|a| (a + 1..n).all(|b| g.has_edge(a, b) == g.has_edge(images[a], images[b])));
        count += usize::from(ok);
        // next permutation in lexicographic order
        let Some(i) = (1..n).rev().find(|&i| images[i - 1] < images[i]) else {
            return count;
        };
        let j = (i..n).rev().find(|&j| images[j] > images[i - 1]).unwrap();
        images.swap(i - 1, j);
        images[i..].reverse();
    }
}

#[test]
fn criterion_07_labeling_contract() {
    let _g = serial();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let g = random_graph(&mut rng, 12, 3);
        let gamma = random_perm(&mut rng, g.n());
        let a = canonical_form(&g);
        let b = canonical_form(&g.relabel(&gamma));
        let ok = a.canonical == b.canonical
            && a.canonical == g.relabel(&a.labeling)
            && a.aut_generators
                .generators()
                .iter()
                .all(|x| g.is_automorphism(x));
        if !ok {
            failures.push(format!("relabeling case {case}"));
        }
    }
    for case in 0..300 {
        let g = random_graph(&mut rng, 7, 2);
        let expected = brute_force_aut_count(&g);
        let r = canonical_form(&g);
        let closure = group_closure(&r.aut_generators, 10_000)
            .map(|c| c.len())
            .unwrap_or(0);
        if closure != expected || r.aut_order_estimate != expected as u128 {
            failures.push(format!("aut case {case}: {closure} vs {expected}"));
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed <= Duration::from_secs(120);
    report(
        7,
        "canonical labeling contract",
        pass,
        &format!(
            "1000 relabelings, 300 group checks, {} failures",
            failures.len()
        ),
        elapsed,
    );
    assert!(pass, "{failures:#?}");
}

fn random_wreath(rng: &mut ChaCha8Rng, n: usize, k: usize) -> WreathElement {
    let pi = random_perm(rng, n);
    let sigma = (0..n).map(|_| random_perm(rng, k)).collect();
    WreathElement::new(pi, sigma).unwrap()
}

#[test]
fn criterion_08_wreath_laws() {
    let _g = serial();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=4);
        let g = random_wreath(&mut rng, n, k);
        let h = random_wreath(&mut rng, n, k);
        let f = random_wreath(&mut rng, n, k);
        let mut x = PartialAssignment::new();
        for u in 0..n {
            if rng.gen_bool(0.7) {
                x.insert(u, rng.gen_range(0..k));
            }
        }
        let gh = g.compose(&h).unwrap();
        let id = WreathElement::identity(n, k);
        let ok = gh.compose(&f).unwrap() == g.compose(&h.compose(&f).unwrap()).unwrap()
            && g.compose(&g.inverse()).unwrap() == id
            && g.inverse().compose(&g).unwrap() == id
            && gh.inverse() == h.inverse().compose(&g.inverse()).unwrap()
            && gh.act_assignment(&x) == h.act_assignment(&g.act_assignment(&x))
            && gh.to_domain() == g.to_domain().compose(&h.to_domain()).unwrap()
            && WreathElement::from_domain(&g.to_domain(), n, k).unwrap() == g
            && (0..n).all(|u| {
                (0..k).all(|r| {
                    gh.act_pair(u, r) == {
                        let (v, s) = g.act_pair(u, r);
                        h.act_pair(v, s)
                    }
                })
            });
        failures += usize::from(!ok);
    }
    let pass = failures == 0;
    report(
        8,
        "wreath product laws",
        pass,
        &format!("1000 triples, {failures} failures"),
        t.elapsed(),
    );
    assert!(pass);
}

#[test]
fn criterion_09_parallel_invariance() {
    let _g = serial();
    let t = Instant::now();
    let mut instances: Vec<(String, SymmetryModel, Vec<usize>)> = Vec::new();
    let intro = cnf_to_model(&intro_cnf(), ValueMode::Global).unwrap();
    instances.push(("intro x1,x2".into(), intro.clone(), vec![0, 1]));
    instances.push(("intro x3..x6".into(), intro, vec![2, 3, 4, 5]));
    for n in 4..=6 {
        let inst = gen_a000088(n).unwrap();
        instances.push((
            format!("graphs n={n}"),
            inst.model(ValueMode::Global).unwrap(),
            inst.prefix,
        ));
    }
    let instances = Arc::new(instances);
    let (tx, rx) = mpsc::channel();
    let work = instances.clone();
    std::thread::spawn(move || {
        let mut mismatches = Vec::new();
        let mut runs = 0;
        for (name, m, prefix) in work.iter() {
            let plan = PrefixPlan::build(m, prefix).unwrap();
            let mut want = run_sequential(m, &plan).unwrap().assignments;
            want.sort();
            // thresholds must stay below the depth
            let t_hier = 2.min(plan.depth() - 1);
            for workers in [1, 2, 4, 8] {
                for policy in [StackPolicy::master(), StackPolicy::hierarchical(t_hier)] {
                    runs += 1;
                    match run_parallel(m, &plan, policy, workers) {
                        Ok(out) if out.assignments == want => {}
                        Ok(out) => mismatches.push(format!(
                            "{name} workers={workers} {policy:?}: {} vs {}",
                            out.assignments.len(),
                            want.len()
                        )),
                        Err(e) => {
                            mismatches.push(format!("{name} workers={workers} {policy:?}: {e}"))
                        }
                    }
                }
            }
        }
        let _ = tx.send((runs, mismatches));
    });
    let result = rx.recv_timeout(Duration::from_secs(5 * 60));
    let elapsed = t.elapsed();
    let (pass, detail) = match &result {
        Ok((runs, mismatches)) => (
            mismatches.is_empty(),
            format!(
                "{runs} runs on {} instances, {} mismatches",
                instances.len(),
                mismatches.len()
            ),
        ),
        Err(_) => (false, "watchdog expired after 5 minutes".to_string()),
    };
    report(9, "parallel output invariance", pass, &detail, elapsed);
    assert!(pass, "{result:?}");
}

#[test]
fn criterion_10_generator_counts() {
    let _g = serial();
    let t = Instant::now();
    let ccp = gen_ccp(12, 6, 5).unwrap();
    let aux = ccp.aux.as_ref().unwrap().n();
    let ramsey = gen_ramsey(18, 4).unwrap();
    let (rv, rc) = (ramsey.cnf.num_vars, ramsey.cnf.clauses.len());
    let mut orders = Vec::new();
    let mut tensor_ok = true;
    for r in 1..=4usize {
        let inst = gen_tensor(2, r, 3, r as u64).unwrap();
        let m = inst.model(ValueMode::Global).unwrap();
        let gens = model_symmetries(&m).unwrap();
        let fact: usize = (1..=r).product();
        // overflowing the cap already proves the bound
        let at_least = group_closure(&gens, fact).map_or(fact, |c| c.len());
        tensor_ok &= at_least >= fact;
        orders.push(at_least);
    }
    let pass = aux == 287 && rv == 153 && rc == 6120 && tensor_ok;
    report(
        10,
        "generator counts",
        pass,
        &format!("ccp aux {aux}, ramsey {rv} vars {rc} clauses, tensor orders >= {orders:?}"),
        t.elapsed(),
    );
    assert!(pass);
}
