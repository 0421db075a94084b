//! Instance families: tensor rank, clique coloring, Ramsey, graph counting.
//!
//! Variable numbering (0-based here, 1-based in files):
//! - edge variables over `i < j` in row-major order `(0,1), (0,2), .., (1,2), ..`;
//! - tensor: `a[i][l]`, then `b[j][l]`, `c[k][l]`, then the product variables
//!   `w[i][j][k][l]`, then per equation `(i,j,k)` the `r - 1` chain variables;
//! - clique coloring: `x[i][j]` for `i != j` row-major, then `y[p][j]`, `z[i][k]`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::ColoredGraph;
use crate::encode::{cnf_to_model, load_aux_model, Cnf, SymmetryModel, ValueMode};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub cnf: Cnf,
    /// Symmetry graph whose first `cnf.num_vars` vertices are the variables.
    pub aux: Option<ColoredGraph>,
    pub prefix: Vec<usize>,
    pub meta: String,
}

impl Instance {
    pub fn model(&self, mode: ValueMode) -> Result<SymmetryModel> {
        match &self.aux {
            Some(g) => load_aux_model(g, self.cnf.num_vars, mode, 2),
            None => cnf_to_model(&self.cnf, mode),
        }
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Index of the edge variable `{i, j}`, `i < j`, in row-major order.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn lit(v: usize, positive: bool) -> i64 {
    let x = v as i64 + 1;
    if positive {
        x
    } else {
        -x
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for t in i + 1..k {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

/// Empty CNF over the edges of `K_n`, with the subdivided `K_n` as symmetry graph.
pub fn gen_a000088(n: usize) -> Result<Instance> {
    if n == 0 {
        return Err(Error::input("a000088 needs n >= 1"));
    }
    let m = binom(n, 2);
    let mut colors = vec![0u32; m];
    colors.extend(std::iter::repeat_n(1, n));
    let mut edges = Vec::with_capacity(2 * m);
    for i in 0..n {
        for j in i + 1..n {
            let e = edge_index(n, i, j);
            edges.push((e, m + i));
            edges.push((e, m + j));
        }
    }
    Ok(Instance {
        cnf: Cnf::new(m, Vec::new())?,
        aux: Some(ColoredGraph::new(colors, edges)?),
        prefix: (0..m).collect(),
        meta: format!("a000088 n={n}"),
    })
}

/// Graphs on `n` nodes with neither a `k`-clique nor a `k`-independent set.
pub fn gen_ramsey(n: usize, k: usize) -> Result<Instance> {
    if k < 2 || n < k {
        return Err(Error::input("ramsey needs n >= k >= 2"));
    }
    let m = binom(n, 2);
    let mut clauses = Vec::with_capacity(2 * binom(n, k));
    for s in subsets(n, k) {
        let mut vars = Vec::with_capacity(k * (k - 1) / 2);
        for a in 0..k {
            for b in a + 1..k {
                vars.push(edge_index(n, s[a], s[b]));
            }
        }
        clauses.push(vars.iter().map(|&v| lit(v, false)).collect());
        clauses.push(vars.iter().map(|&v| lit(v, true)).collect());
    }
    Ok(Instance {
        cnf: Cnf::new(m, clauses)?,
        aux: None,
        prefix: (0..m.min(33)).collect(),
        meta: format!("ramsey n={n} k={k}"),
    })
}

/// Clique coloring: a `t`-colorable graph on `n` nodes containing `K_s`.
pub fn gen_ccp(n: usize, s: usize, t: usize) -> Result<Instance> {
    if s == 0 || n < s || t == 0 {
        return Err(Error::input("ccp needs n >= s >= 1 and t >= 1"));
    }
    let x = |i: usize, j: usize| -> usize { i * (n - 1) + if j < i { j } else { j - 1 } };
    let nx = n * (n - 1);
    let y = |p: usize, j: usize| nx + p * n + j;
    let ny = s * n;
    let z = |i: usize, k: usize| nx + ny + i * t + k;
    let num_vars = nx + ny + n * t;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for p in 0..s {
        clauses.push((0..n).map(|j| lit(y(p, j), true)).collect());
    }
    for p in 0..s {
        for q in 0..s {
            if p != q {
                for j in 0..n {
                    clauses.push(vec![lit(y(p, j), false), lit(y(q, j), false)]);
                }
            }
        }
    }
    for p in 0..s {
        for q in 0..s {
            if p == q {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        clauses.push(vec![
                            lit(y(p, i), false),
                            lit(y(q, j), false),
                            lit(x(i, j), true),
                        ]);
                    }
                }
            }
        }
    }
    for k in 0..t {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    clauses.push(vec![
                        lit(z(i, k), false),
                        lit(z(j, k), false),
                        lit(x(i, j), false),
                    ]);
                }
            }
        }
    }
    for i in 0..n {
        clauses.push((0..t).map(|k| lit(z(i, k), true)).collect());
    }

    let node = |i: usize| num_vars + i;
    let slot = |p: usize| num_vars + n + p;
    let color = |k: usize| num_vars + n + s + k;
    let mut colors = vec![0u32; nx];
    colors.extend(std::iter::repeat_n(1, ny));
    colors.extend(std::iter::repeat_n(2, n * t));
    colors.extend(std::iter::repeat_n(3, n));
    colors.extend(std::iter::repeat_n(4, s));
    colors.extend(std::iter::repeat_n(5, t));
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                edges.push((x(i, j), node(i)));
                edges.push((x(i, j), node(j)));
            }
        }
    }
    for p in 0..s {
        for j in 0..n {
            edges.push((y(p, j), slot(p)));
            edges.push((y(p, j), node(j)));
        }
    }
    for i in 0..n {
        for k in 0..t {
            edges.push((z(i, k), node(i)));
            edges.push((z(i, k), color(k)));
        }
    }
    Ok(Instance {
        cnf: Cnf::new(num_vars, clauses)?,
        aux: Some(ColoredGraph::new(colors, edges)?),
        prefix: (0..n).map(|j| y(0, j)).collect(),
        meta: format!("ccp n={n} s={s} t={t}"),
    })
}

/// Rank-`r` decomposition of a random `m x m x m` tensor over GF(2) with
/// exactly `ones` nonzero entries.
///
/// Each product `a[i][l] b[j][l] c[k][l]` gets a variable `w` defined by four
/// clauses; the parity of `w[i][j][k][0..r]` is fixed by a chain of XOR
/// variables. The symmetry graph has a vertex per variable: product
/// variables are joined to their three factors and to the sum vertex of
/// their equation, each sum vertex is joined to the constant vertex of its
/// right-hand side, and the chain variables of an equation form a path
/// hanging off its sum vertex.
pub fn gen_tensor(m: usize, r: usize, ones: usize, seed: u64) -> Result<Instance> {
    if m == 0 || r == 0 {
        return Err(Error::input("tensor needs m >= 1 and r >= 1"));
    }
    let cells = m * m * m;
    if ones == 0 || ones > cells {
        return Err(Error::input(format!("tensor needs 1 <= ones <= {cells}")));
    }
    let mut target = vec![false; cells];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for idx in sample(&mut rng, cells, ones).into_iter() {
        target[idx] = true;
    }
    let a = |i: usize, l: usize| i * r + l;
    let b = |j: usize, l: usize| m * r + j * r + l;
    let c = |k: usize, l: usize| 2 * m * r + k * r + l;
    let base_w = 3 * m * r;
    let eq = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let w = |e: usize, l: usize| base_w + e * r + l;
    let base_chain = base_w + cells * r;
    let chain = |e: usize, h: usize| base_chain + e * (r - 1) + h;
    let num_vars = base_chain + cells * (r - 1);

    let mut clauses: Vec<Vec<i64>> = Vec::new();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let e = eq(i, j, k);
                for l in 0..r {
                    let v = w(e, l);
                    for f in [a(i, l), b(j, l), c(k, l)] {
                        clauses.push(vec![lit(v, false), lit(f, true)]);
                    }
                    clauses.push(vec![
                        lit(v, true),
                        lit(a(i, l), false),
                        lit(b(j, l), false),
                        lit(c(k, l), false),
                    ]);
                }
                // acc_0 = w_0, acc_h = acc_{h-1} xor w_h, acc_{r-1} = t
                let mut acc = w(e, 0);
                for h in 1..r {
                    let out = chain(e, h - 1);
                    let x = w(e, h);
                    for (sa, sx, so) in [
                        (true, true, false),
                        (false, false, false),
                        (true, false, true),
                        (false, true, true),
                    ] {
                        clauses.push(vec![lit(acc, sa), lit(x, sx), lit(out, so)]);
                    }
                    acc = out;
                }
                clauses.push(vec![lit(acc, target[e])]);
            }
        }
    }

    let sum = |e: usize| num_vars + e;
    let const_vertex = |bit: bool| num_vars + cells + usize::from(bit);
    let mut colors = Vec::with_capacity(num_vars + cells + 2);
    colors.extend(std::iter::repeat_n(0, m * r));
    colors.extend(std::iter::repeat_n(1, m * r));
    colors.extend(std::iter::repeat_n(2, m * r));
    colors.extend(std::iter::repeat_n(3, cells * r));
    colors.extend(std::iter::repeat_n(4, cells * (r - 1)));
    colors.extend(std::iter::repeat_n(5, cells));
    colors.extend([6, 7]);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let e = eq(i, j, k);
                for l in 0..r {
                    let v = w(e, l);
                    edges.extend([(v, a(i, l)), (v, b(j, l)), (v, c(k, l)), (v, sum(e))]);
                }
                edges.push((sum(e), const_vertex(target[e])));
                let mut prev = sum(e);
                for h in 0..r - 1 {
                    edges.push((prev, chain(e, h)));
                    prev = chain(e, h);
                }
            }
        }
    }
    let prefix = (0..m.min(3))
        .flat_map(|i| (0..r).map(move |l| a(i, l)))
        .collect();
    Ok(Instance {
        cnf: Cnf::new(num_vars, clauses)?,
        aux: Some(ColoredGraph::new(colors, edges)?),
        prefix,
        meta: format!("tensor m={m} r={r} ones={ones} seed={seed}"),
    })
}
