//! Colored graphs in a DIMACS-like format:
//! `p edge V E`, `n <vertex> <color>`, `e <u> <v>`, vertices numbered from 1.

use std::fmt::Write as _;

use crate::canon::ColoredGraph;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("line {line}: {msg}"))
}

fn vertex(tok: Option<&str>, n: usize, ln: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(ln, "missing vertex"))?;
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(ln, format!("bad vertex '{tok}'")))?;
    if v == 0 || v > n {
        return Err(parse_err(ln, format!("vertex {v} out of range 1..={n}")));
    }
    Ok(v - 1)
}

pub fn parse_graph(bytes: &[u8]) -> Result<ColoredGraph> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::input(format!("not UTF-8: {e}")))?;
    let mut header: Option<(usize, usize)> = None;
    let mut colors = Vec::new();
    let mut edges = Vec::new();
    let mut last_line = 1;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let mut f = line.split_whitespace();
        let Some(kind) = f.next() else { continue };
        match kind {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(parse_err(ln, "second header"));
                }
                if f.next() != Some("edge") {
                    return Err(parse_err(ln, format!("malformed header '{line}'")));
                }
                let v = f.next().and_then(|t| t.parse().ok());
                let e = f.next().and_then(|t| t.parse().ok());
                let (Some(v), Some(e)) = (v, e) else {
                    return Err(parse_err(ln, format!("malformed header '{line}'")));
                };
                header = Some((v, e));
                colors = vec![0u32; v];
            }
            "n" | "e" => {
                let Some((n, _)) = header else {
                    return Err(parse_err(ln, "line before header"));
                };
                let a = vertex(f.next(), n, ln)?;
                if kind == "n" {
                    let tok = f.next().ok_or_else(|| parse_err(ln, "missing color"))?;
                    colors[a] = tok
                        .parse()
                        .map_err(|_| parse_err(ln, format!("bad color '{tok}'")))?;
                } else {
                    let b = vertex(f.next(), n, ln)?;
                    edges.push((a, b));
                }
            }
            _ => return Err(parse_err(ln, format!("unknown line type '{kind}'"))),
        }
    }
    let Some((_, ne)) = header else {
        return Err(parse_err(last_line, "missing header"));
    };
    if edges.len() != ne {
        return Err(parse_err(
            last_line,
            format!("header declares {ne} edges, found {}", edges.len()),
        ));
    }
    ColoredGraph::new(colors, edges)
}

/// Writes color lines for vertices of nonzero color, then the edges.
pub fn emit_graph(g: &ColoredGraph) -> String {
    let mut out = format!("p edge {} {}\n", g.n(), g.edge_count());
    for (v, &c) in g.colors().iter().enumerate() {
        if c != 0 {
            let _ = writeln!(out, "n {} {c}", v + 1);
        }
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "e {} {}", a + 1, b + 1);
    }
    out
}
