//! DIMACS CNF reading and writing.

use std::fmt::Write as _;

use crate::encode::Cnf;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("line {line}: {msg}"))
}

/// Parses `p cnf <vars> <clauses>` followed by 0-terminated clauses. Clauses
/// may span lines; `c` lines are comments.
pub fn parse_dimacs(bytes: &[u8]) -> Result<Cnf> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::input(format!("not UTF-8: {e}")))?;
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut cur: Vec<i64> = Vec::new();
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(ln, "second header"));
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[0] != "p" || f[1] != "cnf" {
                return Err(parse_err(ln, format!("malformed header '{line}'")));
            }
            let v = f[2]
                .parse()
                .map_err(|_| parse_err(ln, "bad variable count"))?;
            let c = f[3]
                .parse()
                .map_err(|_| parse_err(ln, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        let Some((nv, _)) = header else {
            return Err(parse_err(ln, "clause before header"));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| parse_err(ln, format!("bad literal '{tok}'")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else if lit.unsigned_abs() as usize > nv {
                return Err(parse_err(
                    ln,
                    format!("literal {lit} out of range 1..={nv}"),
                ));
            } else {
                cur.push(lit);
            }
        }
    }
    let Some((nv, nc)) = header else {
        return Err(parse_err(last_line.max(1), "missing header"));
    };
    if !cur.is_empty() {
        return Err(parse_err(last_line, "last clause is not 0-terminated"));
    }
    if clauses.len() != nc {
        return Err(parse_err(
            last_line.max(1),
            format!("header declares {nc} clauses, found {}", clauses.len()),
        ));
    }
    Cnf::new(nv, clauses)
}

pub fn write_clauses(out: &mut String, clauses: &[Vec<i64>]) {
    for c in clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
}

pub fn emit_dimacs(f: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    write_clauses(&mut out, &f.clauses);
    out
}

/// Whitespace-separated 1-based variable numbers; `c` lines are comments.
pub fn parse_prefix(bytes: &[u8], num_vars: usize) -> Result<Vec<usize>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::input(format!("not UTF-8: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('c') {
            continue;
        }
        for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let v: usize = tok
                .parse()
                .map_err(|_| parse_err(i + 1, format!("bad variable '{tok}'")))?;
            if v == 0 || v > num_vars {
                return Err(parse_err(
                    i + 1,
                    format!("variable {v} out of range 1..={num_vars}"),
                ));
            }
            out.push(v - 1);
        }
    }
    let mut seen = vec![false; num_vars];
    for &u in &out {
        if std::mem::replace(&mut seen[u], true) {
            return Err(Error::input(format!(
                "variable {} repeated in prefix",
                u + 1
            )));
        }
    }
    Ok(out)
}

pub fn emit_prefix(prefix: &[usize]) -> String {
    let mut out = String::new();
    for (i, u) in prefix.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}", u + 1);
    }
    out.push('\n');
    out
}
