//! Output formats for the generated assignments.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::assignment::PartialAssignment;
use crate::encode::Cnf;
use crate::error::{Error, Result};

use super::dimacs::write_clauses;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    /// One `a <lits> 0` line per assignment.
    Cubes,
    /// Incremental CNF: the clauses followed by the cubes.
    Icnf,
    /// The formula plus a predicate requiring one of the cubes.
    Sbp,
    Count,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "cubes" => Ok(OutputFormat::Cubes),
            "icnf" => Ok(OutputFormat::Icnf),
            "sbp" => Ok(OutputFormat::Sbp),
            "count" => Ok(OutputFormat::Count),
            _ => Err(Error::input(format!("unknown output format '{s}'"))),
        }
    }
}

/// Literals of a Boolean assignment: value 1 is the positive literal.
pub fn cube_literals(x: &PartialAssignment) -> Vec<i64> {
    x.iter()
        .map(|(u, r)| {
            let v = u as i64 + 1;
            if r == 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

fn write_cubes(out: &mut String, assignments: &[PartialAssignment]) {
    for x in assignments {
        out.push('a');
        for l in cube_literals(x) {
            let _ = write!(out, " {l}");
        }
        out.push_str(" 0\n");
    }
}

pub fn emit_outputs(cnf: &Cnf, assignments: &[PartialAssignment], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Count => {
            let _ = writeln!(out, "{}", assignments.len());
        }
        OutputFormat::Cubes => write_cubes(&mut out, assignments),
        OutputFormat::Icnf => {
            out.push_str("p inccnf\n");
            write_clauses(&mut out, &cnf.clauses);
            write_cubes(&mut out, assignments);
        }
        OutputFormat::Sbp => {
            let v = cnf.num_vars;
            let m = assignments.len();
            let extra: usize = assignments.iter().map(PartialAssignment::len).sum();
            let _ = writeln!(out, "p cnf {} {}", v + m, cnf.clauses.len() + extra + 1);
            write_clauses(&mut out, &cnf.clauses);
            for (i, x) in assignments.iter().enumerate() {
                let s = (v + i + 1) as i64;
                for l in cube_literals(x) {
                    let _ = writeln!(out, "{} {l} 0", -s);
                }
            }
            for i in 0..m {
                let _ = write!(out, "{} ", v + i + 1);
            }
            out.push_str("0\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::dimacs::parse_dimacs;

    fn pa(pairs: &[(usize, usize)]) -> PartialAssignment {
        PartialAssignment::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn cube_line() {
        let f = Cnf::new(2, vec![]).unwrap();
        let s = emit_outputs(&f, &[pa(&[(0, 1), (1, 0)])], OutputFormat::Cubes);
        assert_eq!(s, "a 1 -2 0\n");
    }

    #[test]
    fn sbp_counts() {
        let f = Cnf::new(3, vec![vec![1, 2], vec![-3]]).unwrap();
        let xs = [
            pa(&[(0, 1), (1, 0)]),
            pa(&[(0, 0)]),
            pa(&[(2, 1), (1, 1), (0, 0)]),
        ];
        let s = emit_outputs(&f, &xs, OutputFormat::Sbp);
        let g = parse_dimacs(s.as_bytes()).unwrap();
        assert_eq!(g.num_vars, 3 + 3);
        assert_eq!(g.clauses.len(), 2 + (2 + 1 + 3) + 1);
        assert_eq!(g.clauses.last().unwrap(), &vec![4, 5, 6]);
    }

    #[test]
    fn icnf_layout() {
        let f = Cnf::new(2, vec![vec![1, 2]]).unwrap();
        let s = emit_outputs(&f, &[pa(&[(1, 1)])], OutputFormat::Icnf);
        assert_eq!(s, "p inccnf\n1 2 0\na 2 0\n");
        assert_eq!(emit_outputs(&f, &[], OutputFormat::Count), "0\n");
    }
}
