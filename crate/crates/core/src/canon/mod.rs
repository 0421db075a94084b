//! Vertex-colored graphs and canonical labeling.

mod partition;
mod search;

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{GeneratorSet, Permutation};
pub(crate) use partition::Csr;
use partition::{OrderedPartition, Refiner};
pub(crate) use search::{Canonizer, Selection};

/// Undirected graph with one color per vertex. Edges are kept normalized
/// (`a < b`), sorted and free of duplicates, so `==` compares structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColoredGraph {
    n: usize,
    colors: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl ColoredGraph {
    pub fn new(colors: Vec<u32>, edges: Vec<(usize, usize)>) -> Result<ColoredGraph> {
        let n = colors.len();
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!(
                    "edge ({a},{b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::input(format!("loop at vertex {a}")));
            }
            norm.push((a.min(b) as u32, a.max(b) as u32));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!(
                "duplicate edge ({},{})",
                w[0].0, w[0].1
            )));
        }
        Ok(ColoredGraph {
            n,
            colors,
            edges: norm,
        })
    }

    /// Builds from edges that may repeat; duplicates are merged.
    pub fn from_edges_dedup(colors: Vec<u32>, edges: Vec<(usize, usize)>) -> Result<ColoredGraph> {
        let mut e: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e.dedup();
        ColoredGraph::new(colors, e)
    }

    pub fn empty(colors: Vec<u32>) -> ColoredGraph {
        ColoredGraph {
            n: colors.len(),
            colors,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b) as u32, a.max(b) as u32);
        self.edges.binary_search(&key).is_ok()
    }

    /// Appends vertices with the given colors; returns the first new index.
    pub fn add_vertices(&mut self, colors: &[u32]) -> usize {
        let first = self.n;
        self.colors.extend_from_slice(colors);
        self.n = self.colors.len();
        first
    }

    /// Returns a copy with extra edges; edges already present are ignored.
    pub fn with_extra_edges(
        &self,
        extra: impl IntoIterator<Item = (usize, usize)>,
    ) -> ColoredGraph {
        let mut edges = self.edges.clone();
        for (a, b) in extra {
            assert!(a < self.n && b < self.n && a != b, "bad edge ({a},{b})");
            edges.push((a.min(b) as u32, a.max(b) as u32));
        }
        edges.sort_unstable();
        edges.dedup();
        ColoredGraph {
            n: self.n,
            colors: self.colors.clone(),
            edges,
        }
    }

    pub(crate) fn add_edges_unchecked(&mut self, extra: impl IntoIterator<Item = (usize, usize)>) {
        for (a, b) in extra {
            self.edges.push((a.min(b) as u32, a.max(b) as u32));
        }
        self.edges.sort_unstable();
        self.edges.dedup();
    }

    /// `G^gamma`: vertex `v` becomes `gamma(v)`.
    pub fn relabel(&self, gamma: &Permutation) -> ColoredGraph {
        assert_eq!(gamma.degree(), self.n);
        let mut colors = vec![0; self.n];
        for v in 0..self.n {
            colors[gamma.apply(v)] = self.colors[v];
        }
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (
                    gamma.apply(a as usize) as u32,
                    gamma.apply(b as usize) as u32,
                );
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        ColoredGraph {
            n: self.n,
            colors,
            edges,
        }
    }

    pub fn is_automorphism(&self, gamma: &Permutation) -> bool {
        gamma.degree() == self.n && self.relabel(gamma) == *self
    }

    pub(crate) fn raw_edges(&self) -> &[(u32, u32)] {
        &self.edges
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonResult {
    /// Maps each vertex to its canonical position.
    pub labeling: Permutation,
    pub canonical: ColoredGraph,
    pub aut_generators: GeneratorSet,
    pub aut_order_estimate: u128,
}

/// Labeling and automorphism generators without the relabeled graph.
pub(crate) struct Labeling {
    pub(crate) labeling: Vec<u32>,
    pub(crate) generators: Vec<Vec<u32>>,
    pub(crate) aut_order: u128,
}

thread_local! {
    static CANONIZER: RefCell<Canonizer> = RefCell::new(Canonizer::default());
}

/// Runs `f` with this thread's labeling workspace.
pub(crate) fn with_canonizer<R>(f: impl FnOnce(&mut Canonizer) -> R) -> R {
    CANONIZER.with(|c| f(&mut c.borrow_mut()))
}

pub(crate) fn label(graph: &ColoredGraph) -> Labeling {
    label_with_extra(graph, &[])
}

/// Labels `graph` with `extra` edges added. The extra edges must be new and
/// distinct; this avoids materializing the augmented graph.
pub(crate) fn label_with_extra(graph: &ColoredGraph, extra: &[(u32, u32)]) -> Labeling {
    with_canonizer(|c| {
        c.adj
            .rebuild(graph.n, graph.edges.iter().chain(extra).copied());
        let out = c.run(&graph.colors);
        Labeling {
            labeling: out.labeling,
            generators: out.generators,
            aut_order: out.aut_order,
        }
    })
}

pub fn canonical_form(graph: &ColoredGraph) -> CanonResult {
    let l = label(graph);
    let labeling = Permutation::from_raw(l.labeling);
    let canonical = graph.relabel(&labeling);
    let mut aut = GeneratorSet::trivial(graph.n);
    for g in l.generators {
        aut.push_unchecked(Permutation::from_raw(g));
    }
    CanonResult {
        labeling,
        canonical,
        aut_generators: aut,
        aut_order_estimate: l.aut_order,
    }
}

/// Coarsest equitable refinement of an ordered partition. Cells keep their
/// relative order; members of each output cell are listed in increasing order.
pub fn refine(graph: &ColoredGraph, cells: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; graph.n];
    for cell in cells {
        let c0 = cell.first().copied();
        for &v in cell {
            if v >= graph.n || seen[v] {
                return Err(Error::input(format!(
                    "vertex {v} missing or repeated in partition"
                )));
            }
            seen[v] = true;
            if graph.colors[v] != graph.colors[c0.unwrap()] {
                return Err(Error::input(format!("cell mixes colors at vertex {v}")));
            }
        }
        if cell.is_empty() {
            return Err(Error::input("empty cell in partition"));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::input("partition does not cover all vertices"));
    }
    let adj = Csr::build(graph.n, graph.edges.iter().copied());
    let mut p = OrderedPartition::from_cells(graph.n, cells);
    let starts: Vec<usize> = p.cell_starts().collect();
    Refiner::default().refine(&adj, &mut p, starts);
    Ok(p.to_cells())
}

/// Restricts automorphism generators to `var_vertices`, re-indexed so that
/// `var_vertices[i]` becomes point `i`. Identity restrictions are dropped.
pub fn induced_variable_action(
    result: &CanonResult,
    var_vertices: &[usize],
) -> Result<GeneratorSet> {
    project_generators(
        result
            .aut_generators
            .generators()
            .iter()
            .map(|g| g.images()),
        var_vertices,
    )
}

pub(crate) fn project_generators<'a>(
    gens: impl Iterator<Item = &'a [u32]>,
    var_vertices: &[usize],
) -> Result<GeneratorSet> {
    let k = var_vertices.len();
    let span = var_vertices.iter().max().map_or(0, |&v| v + 1);
    let mut index = vec![u32::MAX; span];
    for (i, &v) in var_vertices.iter().enumerate() {
        index[v] = i as u32;
    }
    let mut out = GeneratorSet::trivial(k);
    for g in gens {
        let mut images = Vec::with_capacity(k);
        for &v in var_vertices {
            let w = g[v] as usize;
            match index.get(w) {
                Some(&i) if i != u32::MAX => images.push(i),
                _ => {
                    return Err(Error::encoding(
                        "automorphism maps a variable vertex outside the variable set",
                        vec![v, w],
                    ))
                }
            }
        }
        let p = Permutation::from_raw(images);
        if !p.is_identity() && !out.generators().contains(&p) {
            out.push_unchecked(p);
        }
    }
    Ok(out)
}
