//! Symmetry graphs for CNF formulas and user supplied auxiliary graphs.
//!
//! The engine works with "domain permutations". In global value mode the
//! domain is the variable set `0..num_vars`. In phase mode it is the variable
//! set followed by one point per (variable, value) pair, pair `(u, r)` being
//! point `num_vars + u * num_values + r`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assignment::PartialAssignment;
use crate::canon::{self, project_generators, ColoredGraph};
use crate::error::{Error, Result};
use crate::perm::{GeneratorSet, Permutation};

/// A CNF formula with 1-based signed literals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl Cnf {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Cnf> {
        let cnf = Cnf { num_vars, clauses };
        cnf.validate()?;
        Ok(cnf)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.clauses.iter().enumerate() {
            for &lit in c {
                if lit == 0 || lit.unsigned_abs() as usize > self.num_vars {
                    return Err(Error::input(format!(
                        "clause {}: literal {lit} out of range 1..={}",
                        i + 1,
                        self.num_vars
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValueMode {
    /// Values are fixed; symmetries permute variables only.
    Global,
    /// Each variable may additionally permute its own values.
    Phase,
}

impl FromStr for ValueMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<ValueMode> {
        match s {
            "global" => Ok(ValueMode::Global),
            "phase" => Ok(ValueMode::Phase),
            _ => Err(Error::input(format!("unknown value mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SymmetryModel {
    graph: ColoredGraph,
    num_vars: usize,
    num_values: usize,
    mode: ValueMode,
    var_vertex: Vec<usize>,
    /// Global mode: one uniquely colored vertex per value.
    value_vertex: Vec<usize>,
    /// Phase mode: vertex of pair `(u, r)` at index `u * num_values + r`.
    literal_vertex: Vec<usize>,
    marker: Option<usize>,
    domain_vertices: Vec<usize>,
}

/// Canonical data of one assignment graph.
#[derive(Clone, Debug)]
pub struct AssignmentKappa {
    /// Canonical form of the assignment graph; equal keys mean isomorphic assignments.
    pub key: ColoredGraph,
    /// Variable `u` goes to its rank among variable vertices in canonical order.
    pub kappa_u: Permutation,
    /// Automorphism generators as domain permutations.
    pub aut: GeneratorSet,
}

const INVARIANT_ROUNDS: usize = 3;

fn next_color(g: &ColoredGraph) -> u32 {
    g.colors().iter().max().map_or(0, |&c| c + 1)
}

impl SymmetryModel {
    pub fn graph(&self) -> &ColoredGraph {
        &self.graph
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_values(&self) -> usize {
        self.num_values
    }

    pub fn mode(&self) -> ValueMode {
        self.mode
    }

    pub fn var_vertex(&self, u: usize) -> usize {
        self.var_vertex[u]
    }

    pub fn var_vertices(&self) -> &[usize] {
        &self.var_vertex
    }

    pub fn value_vertex(&self, r: usize) -> Option<usize> {
        self.value_vertex.get(r).copied()
    }

    pub fn literal_vertex(&self, u: usize, r: usize) -> Option<usize> {
        self.literal_vertex.get(u * self.num_values + r).copied()
    }

    pub fn marker_vertex(&self) -> Option<usize> {
        self.marker
    }

    /// Number of points domain permutations act on.
    pub fn domain_degree(&self) -> usize {
        self.domain_vertices.len()
    }

    /// Graph vertex of each domain point.
    pub fn domain_vertices(&self) -> &[usize] {
        &self.domain_vertices
    }

    /// Domain point of pair `(u, r)`; only meaningful in phase mode.
    pub fn pair_point(&self, u: usize, r: usize) -> usize {
        self.num_vars + u * self.num_values + r
    }

    fn finish(mut self) -> Result<SymmetryModel> {
        self.domain_vertices = self.var_vertex.clone();
        if self.mode == ValueMode::Phase {
            self.domain_vertices.extend_from_slice(&self.literal_vertex);
        }
        check_separation(&self.graph, &self.var_vertex)?;
        if self.mode == ValueMode::Phase {
            check_separation(&self.graph, &self.domain_vertices)?;
        }
        Ok(self)
    }

    fn set_edges(&self, w: &[usize]) -> Vec<(u32, u32)> {
        let hub = match self.mode {
            ValueMode::Global => self.value_vertex[0],
            ValueMode::Phase => self.marker.expect("phase model has a marker"),
        };
        w.iter()
            .map(|&u| {
                let v = self.var_vertex[u];
                (v.min(hub) as u32, v.max(hub) as u32)
            })
            .collect()
    }

    pub(crate) fn assignment_edges(&self, x: &PartialAssignment) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(x.len());
        self.assignment_edges_into(x, &mut out);
        out
    }

    fn assignment_edges_into(&self, x: &PartialAssignment, out: &mut Vec<(u32, u32)>) {
        out.clear();
        out.extend(x.iter().map(|(u, r)| {
            let (a, b) = match self.mode {
                ValueMode::Global => (self.var_vertex[u], self.value_vertex[r]),
                ValueMode::Phase => (
                    self.literal_vertex[u * self.num_values + r],
                    self.marker.expect("phase model has a marker"),
                ),
            };
            (a.min(b) as u32, a.max(b) as u32)
        }));
    }

    /// Projects graph automorphisms onto the domain.
    pub(crate) fn project<'a>(
        &self,
        gens: impl Iterator<Item = &'a [u32]>,
    ) -> Result<GeneratorSet> {
        project_generators(gens, &self.domain_vertices)
    }

    /// Generators of the setwise stabilizer of `w`, as domain permutations.
    pub fn set_stabilizer(&self, w: &[usize]) -> Result<GeneratorSet> {
        let l = canon::label_with_extra(&self.graph, &self.set_edges(w));
        self.project(l.generators.iter().map(|g| g.as_slice()))
    }

    /// Canonical choice among `candidates`: the variable minimizing its
    /// value (global mode only) and then its local invariant in the
    /// assignment graph of `x`, ties broken by the smaller canonical
    /// position.
    ///
    /// With `exact` the full labeling is always computed and the result is
    /// `(Some(selected), Some(aut))`. Otherwise shortcuts are taken while the
    /// outcome for `p` is already decided: `(None, None)` when `p` loses on
    /// value or invariant, `(Some(q), None)` when refinement alone picks `q`
    /// (automorphisms are then only computed if `need_aut` and `q == p`).
    /// Canonical positions respect the cell order of the root equitable
    /// partition, which is what makes the refinement shortcut sound.
    pub(crate) fn select_extension(
        &self,
        x: &PartialAssignment,
        candidates: &[usize],
        p: usize,
        need_aut: bool,
        exact: bool,
    ) -> Result<(Option<usize>, Option<GeneratorSet>)> {
        if candidates.is_empty() {
            return Err(Error::invariant("no candidates to select from"));
        }
        // isomorphisms of assignment graphs keep values in global mode
        let value = |u: usize| match self.mode {
            ValueMode::Global => x.get(u).unwrap_or(0),
            ValueMode::Phase => 0,
        };
        let low = candidates.iter().map(|&u| value(u)).min().unwrap();
        if !exact && value(p) != low {
            return Ok((None, None));
        }
        canon::with_canonizer(|c| {
            let mut sel = std::mem::take(&mut c.selection);
            let out = self.select_in(c, &mut sel, x, candidates, low, p, need_aut, exact);
            c.selection = sel;
            out
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn select_in(
        &self,
        c: &mut canon::Canonizer,
        sel: &mut canon::Selection,
        x: &PartialAssignment,
        candidates: &[usize],
        low: usize,
        p: usize,
        need_aut: bool,
        exact: bool,
    ) -> Result<(Option<usize>, Option<GeneratorSet>)> {
        let colors = self.graph.colors();
        let value = |u: usize| match self.mode {
            ValueMode::Global => x.get(u).unwrap_or(0),
            ValueMode::Phase => 0,
        };
        sel.candidates.clear();
        sel.candidates
            .extend(candidates.iter().copied().filter(|&u| value(u) == low));
        let candidates = &sel.candidates;
        self.assignment_edges_into(x, &mut sel.extra);
        let extra = &sel.extra;
        sel.vertices.clear();
        sel.vertices
            .extend(candidates.iter().map(|&u| self.var_vertex[u]));
        let vertices = &sel.vertices;
        c.local_invariants(
            self.graph.raw_edges(),
            extra,
            colors,
            INVARIANT_ROUNDS,
            vertices,
            &mut sel.inv,
        );
        let inv = &sel.inv;
        let best = *inv.iter().min().unwrap();
        sel.tied.clear();
        sel.tied
            .extend((0..candidates.len()).filter(|&i| inv[i] == best));
        let tied = &sel.tied;
        if !exact {
            if !tied.iter().any(|&i| candidates[i] == p) {
                return Ok((None, None));
            }
            if tied.len() == 1 && !need_aut {
                return Ok((Some(p), None));
            }
            // stable hash classes that are all singletons admit no automorphism
            if tied.len() == 1
                && c.stabilize_hashes(self.graph.raw_edges(), extra, colors) == self.graph.n()
            {
                return Ok((Some(p), Some(GeneratorSet::trivial(self.domain_degree()))));
            }
        }
        c.prepare_hashed(self.graph.raw_edges(), extra, colors);
        if !exact && tied.len() > 1 {
            let first = tied
                .iter()
                .map(|&i| c.root.start_of(vertices[i]))
                .min()
                .unwrap();
            let mut hits = tied
                .iter()
                .filter(|&&i| c.root.start_of(vertices[i]) == first);
            let q = *hits.next().unwrap();
            if hits.next().is_none() && (candidates[q] != p || !need_aut) {
                return Ok((Some(candidates[q]), None));
            }
        }
        if !c.root.is_discrete() {
            c.adj.rebuild(
                self.graph.n(),
                self.graph.raw_edges().iter().chain(extra).copied(),
            );
        }
        let out = c.search();
        let q = *tied
            .iter()
            .min_by_key(|&&i| out.labeling[vertices[i]])
            .unwrap();
        let aut = self.project(out.generators.iter().map(|g| g.as_slice()))?;
        Ok((Some(candidates[q]), Some(aut)))
    }

    fn check_assignment(&self, x: &PartialAssignment) -> Result<()> {
        for (u, r) in x.iter() {
            if u >= self.num_vars || r >= self.num_values {
                return Err(Error::input(format!(
                    "assignment binds variable {u} to value {r}, outside the model"
                )));
            }
        }
        Ok(())
    }
}

/// No vertex outside `inside` may share a color with a vertex in `inside`.
fn check_separation(g: &ColoredGraph, inside: &[usize]) -> Result<()> {
    let mut is_in = vec![false; g.n()];
    for &v in inside {
        is_in[v] = true;
    }
    let mut colors: Vec<u32> = inside.iter().map(|&v| g.color(v)).collect();
    colors.sort_unstable();
    colors.dedup();
    let bad: Vec<usize> = (0..g.n())
        .filter(|&v| !is_in[v] && colors.binary_search(&g.color(v)).is_ok())
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::encoding(
            "non-variable vertices share a color with variable vertices",
            bad,
        ))
    }
}

/// Builds the CNF symmetry graph.
///
/// Global mode: variable vertices (which double as positive literals),
/// negative literal vertices, clause vertices, and the two value vertices
/// false and true. Phase mode: variable vertices, both literals of each
/// variable in one color class, clause vertices and a marker vertex.
pub fn cnf_to_model(f: &Cnf, mode: ValueMode) -> Result<SymmetryModel> {
    f.validate()?;
    let nv = f.num_vars;
    let mut colors = vec![0u32; nv];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let literal = |lit: i64| -> usize {
        let u = lit.unsigned_abs() as usize - 1;
        match mode {
            ValueMode::Global => {
                if lit > 0 {
                    u
                } else {
                    nv + u
                }
            }
            ValueMode::Phase => nv + 2 * u + usize::from(lit > 0),
        }
    };
    let literal_vertex: Vec<usize> = match mode {
        ValueMode::Global => {
            colors.extend(std::iter::repeat_n(1, nv));
            for u in 0..nv {
                edges.push((u, nv + u));
            }
            Vec::new()
        }
        ValueMode::Phase => {
            colors.extend(std::iter::repeat_n(1, 2 * nv));
            for u in 0..nv {
                edges.push((u, nv + 2 * u));
                edges.push((u, nv + 2 * u + 1));
            }
            (nv..3 * nv).collect()
        }
    };
    for clause in &f.clauses {
        let c = colors.len();
        colors.push(2);
        let mut lits: Vec<usize> = clause.iter().map(|&l| literal(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        edges.extend(lits.into_iter().map(|l| (c, l)));
    }
    let (value_vertex, marker) = match mode {
        ValueMode::Global => {
            let f_vertex = colors.len();
            colors.extend([3, 4]);
            (vec![f_vertex, f_vertex + 1], None)
        }
        ValueMode::Phase => {
            let m = colors.len();
            colors.push(3);
            (Vec::new(), Some(m))
        }
    };
    let graph = ColoredGraph::new(colors, edges)?;
    SymmetryModel {
        graph,
        num_vars: nv,
        num_values: 2,
        mode,
        var_vertex: (0..nv).collect(),
        value_vertex,
        literal_vertex,
        marker,
        domain_vertices: Vec::new(),
    }
    .finish()
}

/// Wraps an auxiliary graph whose first `num_vars` vertices are the
/// variables. Global mode appends one uniquely colored vertex per value.
/// Phase mode appends a vertex per (variable, value) pair joined to its
/// variable, all in one new color, plus a marker vertex.
pub fn load_aux_model(
    g: &ColoredGraph,
    num_vars: usize,
    mode: ValueMode,
    num_values: usize,
) -> Result<SymmetryModel> {
    if num_vars > g.n() {
        return Err(Error::input(format!(
            "graph has {} vertices but {num_vars} variables were requested",
            g.n()
        )));
    }
    if num_values == 0 {
        return Err(Error::input("value set is empty"));
    }
    let var_vertex: Vec<usize> = (0..num_vars).collect();
    check_separation(g, &var_vertex)?;
    let mut graph = g.clone();
    let base = next_color(&graph);
    let (value_vertex, literal_vertex, marker) = match mode {
        ValueMode::Global => {
            let colors: Vec<u32> = (0..num_values as u32).map(|r| base + r).collect();
            let first = graph.add_vertices(&colors);
            ((first..first + num_values).collect(), Vec::new(), None)
        }
        ValueMode::Phase => {
            let first = graph.add_vertices(&vec![base; num_vars * num_values]);
            let m = graph.add_vertices(&[base + 1]);
            let lits: Vec<usize> = (first..first + num_vars * num_values).collect();
            graph.add_edges_unchecked(
                (0..num_vars)
                    .flat_map(|u| (0..num_values).map(move |r| (u, first + u * num_values + r))),
            );
            (Vec::new(), lits, Some(m))
        }
    };
    SymmetryModel {
        graph,
        num_vars,
        num_values,
        mode,
        var_vertex,
        value_vertex,
        literal_vertex,
        marker,
        domain_vertices: Vec::new(),
    }
    .finish()
}

/// The graph whose automorphisms fix the variable set `w` setwise.
pub fn attach_set(m: &SymmetryModel, w: &[usize]) -> Result<ColoredGraph> {
    let mut seen = vec![false; m.num_vars];
    for &u in w {
        if u >= m.num_vars || std::mem::replace(&mut seen[u], true) {
            return Err(Error::input(format!("bad or repeated variable {u} in set")));
        }
    }
    Ok(m.graph.with_extra_edges(
        m.set_edges(w)
            .into_iter()
            .map(|(a, b)| (a as usize, b as usize)),
    ))
}

/// The graph whose automorphisms fix the assignment `x`.
pub fn attach_assignment(m: &SymmetryModel, x: &PartialAssignment) -> Result<ColoredGraph> {
    m.check_assignment(x)?;
    Ok(m.graph.with_extra_edges(
        m.assignment_edges(x)
            .into_iter()
            .map(|(a, b)| (a as usize, b as usize)),
    ))
}

pub fn kappa_of_assignment(m: &SymmetryModel, x: &PartialAssignment) -> Result<AssignmentKappa> {
    let g = attach_assignment(m, x)?;
    let r = canon::canonical_form(&g);
    let aut = m.project(r.aut_generators.generators().iter().map(|p| p.images()))?;
    let mut order: Vec<usize> = (0..m.num_vars).collect();
    order.sort_by_key(|&u| r.labeling.apply(m.var_vertex[u]));
    let mut rank = vec![0usize; m.num_vars];
    for (i, &u) in order.iter().enumerate() {
        rank[u] = i;
    }
    Ok(AssignmentKappa {
        key: r.canonical,
        kappa_u: Permutation::from_images(rank)?,
        aut,
    })
}

/// Symmetry group of the bare model, as domain permutations.
pub fn model_symmetries(m: &SymmetryModel) -> Result<GeneratorSet> {
    m.set_stabilizer(&[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{group_closure, orbit};

    pub(crate) fn intro_cnf() -> Cnf {
        Cnf::new(6, vec![vec![1, 2], vec![1, -3, -5], vec![2, -4, -6]]).unwrap()
    }

    fn order(g: &GeneratorSet) -> usize {
        group_closure(g, 100_000).unwrap().len()
    }

    #[test]
    fn empty_cnf_global_counts() {
        let m = cnf_to_model(&Cnf::new(2, vec![]).unwrap(), ValueMode::Global).unwrap();
        assert_eq!(m.graph().n(), 6);
        assert_eq!(m.graph().edge_count(), 2);
    }

    #[test]
    fn intro_graph_counts_and_group() {
        let m = cnf_to_model(&intro_cnf(), ValueMode::Global).unwrap();
        assert_eq!(m.graph().n(), 6 + 6 + 3 + 2);
        assert_eq!(m.graph().edge_count(), 6 + 8);
        let g = model_symmetries(&m).unwrap();
        assert_eq!(order(&g), 8);
        let closure = group_closure(&g, 100).unwrap();
        let a = Permutation::from_cycles(6, &[&[0, 1], &[2, 3], &[4, 5]]).unwrap();
        let b = Permutation::from_cycles(6, &[&[3, 5]]).unwrap();
        assert!(closure.contains(&a) && closure.contains(&b));
    }

    #[test]
    fn single_variable_phase_flip() {
        let m = cnf_to_model(&Cnf::new(1, vec![]).unwrap(), ValueMode::Phase).unwrap();
        let g = model_symmetries(&m).unwrap();
        assert_eq!(m.domain_degree(), 3);
        assert_eq!(order(&g), 2);
        assert_eq!(orbit(&g, m.pair_point(0, 0)), vec![1, 2]);
    }

    #[test]
    fn aux_isolated_variables() {
        let g = ColoredGraph::empty(vec![0; 3]);
        let m = load_aux_model(&g, 3, ValueMode::Global, 2).unwrap();
        assert_eq!(order(&model_symmetries(&m).unwrap()), 6);
    }

    #[test]
    fn aux_color_clash_is_reported() {
        let g = ColoredGraph::empty(vec![0, 0, 0]);
        match load_aux_model(&g, 2, ValueMode::Global, 2) {
            Err(Error::Encoding { vertices, .. }) => assert_eq!(vertices, vec![2]),
            other => panic!("expected encoding error, got {other:?}"),
        }
    }

    #[test]
    fn set_stabilizers_on_intro() {
        let m = cnf_to_model(&intro_cnf(), ValueMode::Global).unwrap();
        let s = m.set_stabilizer(&[2]).unwrap();
        assert_eq!(orbit(&s, 3), vec![3, 5]);
        let s = m.set_stabilizer(&[0, 1]).unwrap();
        let a = Permutation::from_cycles(6, &[&[0, 1], &[2, 3], &[4, 5]]).unwrap();
        assert!(group_closure(&s, 100).unwrap().contains(&a));
        assert_eq!(attach_set(&m, &[]).unwrap(), *m.graph());
    }

    #[test]
    fn intro_assignment_keys() {
        let m = cnf_to_model(&intro_cnf(), ValueMode::Global).unwrap();
        let key = |pairs: &[(usize, usize)]| {
            kappa_of_assignment(
                &m,
                &PartialAssignment::from_pairs(pairs.iter().copied()).unwrap(),
            )
            .unwrap()
            .key
        };
        assert_eq!(key(&[(0, 0), (1, 1)]), key(&[(0, 1), (1, 0)]));
        assert_ne!(key(&[(0, 0), (1, 0)]), key(&[(0, 0), (1, 1)]));
        assert_eq!(
            attach_assignment(&m, &PartialAssignment::new()).unwrap(),
            *m.graph()
        );
    }

    #[test]
    fn phase_mode_identifies_literals() {
        let m = cnf_to_model(&Cnf::new(1, vec![]).unwrap(), ValueMode::Phase).unwrap();
        let k0 =
            kappa_of_assignment(&m, &PartialAssignment::from_pairs([(0, 0)]).unwrap()).unwrap();
        let k1 =
            kappa_of_assignment(&m, &PartialAssignment::from_pairs([(0, 1)]).unwrap()).unwrap();
        assert_eq!(k0.key, k1.key);
    }

    #[test]
    fn rigid_model_has_trivial_aut() {
        // path with distinct colors on the variables
        let g = ColoredGraph::new(vec![0, 1, 2], vec![(0, 1), (1, 2)]).unwrap();
        let m = load_aux_model(&g, 3, ValueMode::Global, 2).unwrap();
        let k = kappa_of_assignment(&m, &PartialAssignment::from_pairs([(0, 1)]).unwrap()).unwrap();
        assert!(k.aut.is_empty());
    }
}
