use std::sync::Arc;

use serde::Serialize;

use crate::encode::{SymmetryModel, ValueMode};
use crate::error::{Error, Result};
use crate::perm::{orbit_with_transversal, GeneratorSet, OrbitTransversal, Permutation};

const NONE: u32 = u32::MAX;

/// Precomputed data for extending level `j - 1` to level `j`.
#[derive(Clone, Debug)]
pub struct Level {
    var: usize,
    aut_prev: Arc<GeneratorSet>,
    orbit_prev: OrbitTransversal,
    /// Orbit members in increasing order.
    candidates: Vec<usize>,
    /// `nu[i]` maps `candidates[i]` to `var`.
    nu: Vec<Permutation>,
    nu_slot: Vec<u32>,
    in_cur_orbit: Vec<bool>,
}

impl Level {
    /// The prefix variable `u_j`.
    pub fn var(&self) -> usize {
        self.var
    }

    /// Generators of the setwise stabilizer of `U_{j-1}`.
    pub fn aut_prev(&self) -> &Arc<GeneratorSet> {
        &self.aut_prev
    }

    /// The orbit of `u_j` under `aut_prev`, with witnesses.
    pub fn orbit_prev(&self) -> &OrbitTransversal {
        &self.orbit_prev
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    /// A stabilizer element mapping `p` to `u_j`.
    pub fn nu(&self, p: usize) -> Option<&Permutation> {
        match self.nu_slot.get(p) {
            Some(&s) if s != NONE => Some(&self.nu[s as usize]),
            _ => None,
        }
    }

    /// Whether `v` lies in the orbit of `u_j` under the stabilizer of `U_j`.
    pub fn in_cur_orbit(&self, v: usize) -> bool {
        self.in_cur_orbit[v]
    }

    pub fn cur_orbit(&self) -> Vec<usize> {
        (0..self.in_cur_orbit.len())
            .filter(|&v| self.in_cur_orbit[v])
            .collect()
    }
}

/// A prefix `u_1..u_k` with the stabilizer data of every level.
#[derive(Clone, Debug)]
pub struct PrefixPlan {
    prefix: Vec<usize>,
    levels: Vec<Level>,
    aut_root: Arc<GeneratorSet>,
    num_vars: usize,
    num_values: usize,
    mode: ValueMode,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanSummary {
    pub level: usize,
    pub var: usize,
    pub orbit_prev: usize,
    pub orbit_cur: usize,
}

impl PrefixPlan {
    pub fn build(m: &SymmetryModel, prefix: &[usize]) -> Result<PrefixPlan> {
        let n = m.num_vars();
        if m.num_values() == 0 {
            return Err(Error::input("value set is empty"));
        }
        let mut seen = vec![false; n];
        for &u in prefix {
            if u >= n {
                return Err(Error::input(format!(
                    "prefix variable {} out of range 1..={n}",
                    u + 1
                )));
            }
            if std::mem::replace(&mut seen[u], true) {
                return Err(Error::input(format!("prefix variable {} repeated", u + 1)));
            }
        }
        let stabs: Vec<Arc<GeneratorSet>> = (0..=prefix.len())
            .map(|j| m.set_stabilizer(&prefix[..j]).map(Arc::new))
            .collect::<Result<_>>()?;
        let mut levels = Vec::with_capacity(prefix.len());
        for (j, &var) in prefix.iter().enumerate() {
            let aut_prev = stabs[j].clone();
            let orbit_prev = orbit_with_transversal(&aut_prev, var)?;
            let mut candidates = orbit_prev.members().to_vec();
            candidates.sort_unstable();
            let mut nu = Vec::with_capacity(candidates.len());
            let mut nu_slot = vec![NONE; n];
            for (i, &p) in candidates.iter().enumerate() {
                let w = orbit_prev
                    .witness(p)
                    .ok_or_else(|| Error::invariant("orbit member without witness"))?;
                nu.push(w.inverse());
                nu_slot[p] = i as u32;
            }
            let cur = orbit_with_transversal(&stabs[j + 1], var)?;
            let mut in_cur_orbit = vec![false; n];
            for &v in cur.members() {
                in_cur_orbit[v] = true;
            }
            levels.push(Level {
                var,
                aut_prev,
                orbit_prev,
                candidates,
                nu,
                nu_slot,
                in_cur_orbit,
            });
        }
        Ok(PrefixPlan {
            prefix: prefix.to_vec(),
            levels,
            aut_root: stabs[0].clone(),
            num_vars: n,
            num_values: m.num_values(),
            mode: m.mode(),
        })
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    /// Level `j` in `1..=depth`.
    pub fn level(&self, j: usize) -> &Level {
        &self.levels[j - 1]
    }

    /// Symmetries of the bare model.
    pub fn aut_root(&self) -> &Arc<GeneratorSet> {
        &self.aut_root
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

    pub fn summary(&self) -> Vec<PlanSummary> {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, l)| PlanSummary {
                level: i + 1,
                var: l.var,
                orbit_prev: l.candidates.len(),
                orbit_cur: l.in_cur_orbit.iter().filter(|&&b| b).count(),
            })
            .collect()
    }
}
