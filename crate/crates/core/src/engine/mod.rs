//! Generation of one representative per isomorphism class of prefix
//! assignments by canonical extension.
//!
//! A search node at level `l` is an assignment `X` on `U_{l-1} + {p}`. It is
//! accepted when its extension variable `p` is in the same `Aut(X)` orbit as
//! the canonically chosen extension variable, then normalized to `U_l` by the
//! precomputed `nu(p)`. Children are created only for extensions that are
//! minimal in their orbit under the automorphisms of the parent.

mod plan;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assignment::{act, PartialAssignment};
use crate::encode::{SymmetryModel, ValueMode};
use crate::error::{Error, Result};
use crate::perm::{orbit_minima, GeneratorSet};

pub use plan::{Level, PlanSummary, PrefixPlan};

/// A search node in transit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkItem {
    pub id: u64,
    /// Bound on `U_{level-1}` plus `p`.
    pub assignment: PartialAssignment,
    pub level: usize,
    /// The extension variable; `None` only for the root.
    pub p: Option<usize>,
    /// Automorphisms of the parent, as domain permutations.
    pub parent_aut: Arc<GeneratorSet>,
}

impl WorkItem {
    pub fn root(plan: &PrefixPlan) -> WorkItem {
        WorkItem {
            id: 0,
            assignment: PartialAssignment::new(),
            level: 0,
            p: None,
            parent_aut: plan.aut_root().clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub popped: u64,
    pub accepted: u64,
    pub rejected_t1: u64,
    /// Extensions rejected before a child was created for them.
    pub rejected_t2: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Indexed by level `0..=k`.
    pub levels: Vec<LevelStats>,
}

impl RunStats {
    pub fn new(depth: usize) -> Self {
        RunStats {
            levels: vec![LevelStats::default(); depth + 1],
        }
    }

    pub fn merge(&mut self, other: &RunStats) {
        if self.levels.len() < other.levels.len() {
            self.levels
                .resize(other.levels.len(), LevelStats::default());
        }
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            a.popped += b.popped;
            a.accepted += b.accepted;
            a.rejected_t1 += b.rejected_t1;
            a.rejected_t2 += b.rejected_t2;
        }
    }

    /// Accepted node count per level `1..=k`.
    pub fn accepted_profile(&self) -> Vec<u64> {
        self.levels.iter().skip(1).map(|l| l.accepted).collect()
    }
}

/// Outcome of the acceptance test on a popped node.
#[derive(Clone, Debug)]
pub struct T1Outcome {
    pub accepted: bool,
    /// The variable the canonical rule selects. `None` when the node was
    /// rejected early, before the choice among the remaining candidates
    /// was settled.
    pub selected: Option<usize>,
    /// The node moved onto `U_l`. Left empty for nodes rejected on the
    /// engine's fast path.
    pub normalized: PartialAssignment,
    /// Automorphisms of `normalized`, as domain permutations. Present for
    /// accepted nodes unless the caller declined them.
    pub aut: Option<GeneratorSet>,
}

fn same_orbit_on(gens: &GeneratorSet, a: usize, b: usize) -> bool {
    if a == b {
        return true;
    }
    let mut seen = vec![false; gens.degree()];
    let mut queue = vec![a];
    seen[a] = true;
    while let Some(x) = queue.pop() {
        for g in gens.generators() {
            let y = g.apply(x);
            if y == b {
                return true;
            }
            if !seen[y] {
                seen[y] = true;
                queue.push(y);
            }
        }
    }
    false
}

/// The acceptance test for a node at level `l >= 1`.
///
/// Among the variables `v` of `X` that `nu(p)` sends into the orbit of
/// `u_l` under the stabilizer of `U_l`, one is selected canonically: the
/// smallest value (global mode), then the smallest local vertex invariant,
/// then the smallest canonical position.
/// `X` is accepted iff `p` and the selected variable lie in one `Aut(X)`
/// orbit. Always computes the full labeling.
pub fn test_t1(item: &WorkItem, plan: &PrefixPlan, m: &SymmetryModel) -> Result<T1Outcome> {
    t1(item, plan, m, true, true)
}

fn t1(
    item: &WorkItem,
    plan: &PrefixPlan,
    m: &SymmetryModel,
    need_aut: bool,
    exact: bool,
) -> Result<T1Outcome> {
    let l = item.level;
    let p = item
        .p
        .ok_or_else(|| Error::invariant("acceptance test on the root node"))?;
    let level = plan.level(l);
    let nu = level
        .nu(p)
        .ok_or_else(|| Error::invariant(format!("variable {p} is not a candidate at level {l}")))?;
    let mut candidates = Vec::with_capacity(item.assignment.len());
    candidates.extend(
        item.assignment
            .variables()
            .filter(|&v| level.in_cur_orbit(nu.apply(v))),
    );
    if candidates.is_empty() {
        return Err(Error::invariant(format!(
            "no candidate variable for {} at level {l}",
            item.assignment
        )));
    }
    let (selected, aut) = m.select_extension(&item.assignment, &candidates, p, need_aut, exact)?;
    let accepted = match (selected, &aut) {
        (None, _) => false,
        (Some(q), Some(aut)) => same_orbit_on(aut, p, q),
        // decided by refinement: distinct cells are distinct orbits
        (Some(q), None) => q == p,
    };
    let normalized = if accepted || exact {
        act(nu, &item.assignment, m.mode(), m.num_vars(), m.num_values())
    } else {
        PartialAssignment::default()
    };
    let aut = if accepted {
        aut.map(|a| a.conjugated(nu))
    } else {
        aut
    };
    Ok(T1Outcome {
        accepted,
        selected,
        normalized,
        aut,
    })
}

/// Orbit-minimality of the extension `(p, X(p))` under the parent's
/// automorphisms. In global value mode only `p` matters.
pub fn test_t2(item: &WorkItem, m: &SymmetryModel) -> bool {
    let Some(p) = item.p else {
        return true;
    };
    let point = match m.mode() {
        ValueMode::Global => p,
        ValueMode::Phase => {
            let r = item.assignment.get(p).expect("extension variable is bound");
            m.pair_point(p, r)
        }
    };
    orbit_minima(&item.parent_aut)[point] == point
}

/// Result of processing one node.
#[derive(Debug, Default)]
pub struct Expansion {
    pub emitted: Option<PartialAssignment>,
    pub children: Vec<WorkItem>,
}

/// Processes a popped node: the acceptance test (skipped at the root),
/// normalization, emission at full depth, otherwise creation of the children
/// that pass the orbit-minimality test, in `(p, r)` order.
pub fn expand(
    item: &WorkItem,
    plan: &PrefixPlan,
    m: &SymmetryModel,
    stats: &mut RunStats,
) -> Result<Expansion> {
    let l = item.level;
    let k = plan.depth();
    stats.levels[l].popped += 1;
    let (s, aut_s) = if l == 0 {
        (item.assignment.clone(), item.parent_aut.clone())
    } else {
        let t1 = t1(item, plan, m, l < k, false)?;
        if !t1.accepted {
            stats.levels[l].rejected_t1 += 1;
            return Ok(Expansion::default());
        }
        let aut = t1
            .aut
            .unwrap_or_else(|| GeneratorSet::trivial(m.domain_degree()));
        (t1.normalized, Arc::new(aut))
    };
    stats.levels[l].accepted += 1;
    if l == k {
        return Ok(Expansion {
            emitted: Some(s),
            children: Vec::new(),
        });
    }
    let next = plan.level(l + 1);
    let minima = orbit_minima(&aut_s);
    let mut children = Vec::new();
    for &p in next.candidates() {
        for r in 0..m.num_values() {
            let point = match m.mode() {
                ValueMode::Global => p,
                ValueMode::Phase => m.pair_point(p, r),
            };
            if minima[point] != point {
                stats.levels[l + 1].rejected_t2 += 1;
                continue;
            }
            children.push(WorkItem {
                id: 0,
                assignment: s.with(p, r),
                level: l + 1,
                p: Some(p),
                parent_aut: aut_s.clone(),
            });
        }
    }
    Ok(Expansion {
        emitted: None,
        children,
    })
}

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub assignments: Vec<PartialAssignment>,
    pub stats: RunStats,
}

/// Depth-first traversal with a single stack.
pub fn run_sequential(m: &SymmetryModel, plan: &PrefixPlan) -> Result<RunOutput> {
    let mut stats = RunStats::new(plan.depth());
    let mut out = Vec::new();
    let mut stack = vec![WorkItem::root(plan)];
    while let Some(item) = stack.pop() {
        let e = expand(&item, plan, m, &mut stats)?;
        if let Some(s) = e.emitted {
            out.push(s);
        }
        stack.extend(e.children.into_iter().rev());
    }
    Ok(RunOutput {
        assignments: out,
        stats,
    })
}
