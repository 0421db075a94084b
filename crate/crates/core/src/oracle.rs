//! Brute-force ground truth for tests: explicit orbit enumeration over a
//! full group closure, and Burnside counting of unlabeled graphs.

use serde::Serialize;

use crate::assignment::PartialAssignment;
use crate::encode::{SymmetryModel, ValueMode};
use crate::error::{Error, Result};
use crate::perm::group_closure;

/// Bound on `|R|^k * |group|` for the exhaustive oracle.
pub const ORACLE_CAP: u64 = 10_000_000;

/// Orbits of all assignments on a prefix set under its setwise stabilizer.
#[derive(Clone, Debug)]
pub struct OrbitClasses {
    prefix: Vec<usize>,
    num_values: usize,
    /// Class id of each assignment, indexed by its base-`|R|` code.
    class_of: Vec<u32>,
    count: usize,
}

impl OrbitClasses {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    /// Class of `x`, or `None` if `x` is not defined on exactly the prefix.
    pub fn class_of(&self, x: &PartialAssignment) -> Option<usize> {
        if x.len() != self.prefix.len() {
            return None;
        }
        let mut code = 0usize;
        for &u in self.prefix.iter().rev() {
            let r = x.get(u)?;
            if r >= self.num_values {
                return None;
            }
            code = code * self.num_values + r;
        }
        Some(self.class_of[code] as usize)
    }

    /// The assignment with the given code.
    pub fn decode(&self, mut code: usize) -> PartialAssignment {
        let mut x = PartialAssignment::new();
        for &u in &self.prefix {
            x.insert(u, code % self.num_values);
            code /= self.num_values;
        }
        x
    }

    /// Number of assignments on the prefix.
    pub fn total(&self) -> usize {
        self.class_of.len()
    }
}

/// Partitions `R^{U_k}` into orbits of the stabilizer of `U_k`.
pub fn orbit_classes(m: &SymmetryModel, prefix: &[usize]) -> Result<OrbitClasses> {
    let k = prefix.len();
    let nr = m.num_values();
    if nr == 0 {
        return Err(Error::input("value set is empty"));
    }
    let mut slot = vec![usize::MAX; m.num_vars()];
    for (i, &u) in prefix.iter().enumerate() {
        if u >= m.num_vars() || slot[u] != usize::MAX {
            return Err(Error::input(format!("bad or repeated prefix variable {u}")));
        }
        slot[u] = i;
    }
    let total = (nr as u64)
        .checked_pow(k as u32)
        .filter(|&t| t <= ORACLE_CAP)
        .ok_or_else(|| Error::input(format!("oracle cap exceeded: {nr}^{k} assignments")))?;
    let stab = m.set_stabilizer(prefix)?;
    let group_cap = (ORACLE_CAP / total).max(1) as usize;
    let group = group_closure(&stab, group_cap).map_err(|_| {
        Error::input(format!(
            "oracle cap exceeded: {total} assignments times more than {group_cap} group elements"
        ))
    })?;

    // For each group element, where the binding (prefix[i], r) goes, as
    // (slot, value).
    let mut moves: Vec<Vec<(usize, usize)>> = Vec::with_capacity(group.len());
    for g in &group {
        let mut mv = Vec::with_capacity(k * nr);
        for &u in prefix {
            for r in 0..nr {
                let (v, s) = match m.mode() {
                    ValueMode::Global => (g.apply(u), r),
                    ValueMode::Phase => {
                        let q = g.apply(m.pair_point(u, r)) - m.num_vars();
                        (q / nr, q % nr)
                    }
                };
                let i = slot[v];
                if i == usize::MAX {
                    return Err(Error::invariant(
                        "stabilizer element moves a prefix variable out",
                    ));
                }
                mv.push((i, s));
            }
        }
        moves.push(mv);
    }

    let total = total as usize;
    let mut weight = vec![1usize; k];
    for i in 1..k {
        weight[i] = weight[i - 1] * nr;
    }
    let mut class_of = vec![u32::MAX; total];
    let mut digits = vec![0usize; k];
    let mut count = 0usize;
    for code in 0..total {
        if class_of[code] != u32::MAX {
            continue;
        }
        let mut c = code;
        for d in digits.iter_mut() {
            *d = c % nr;
            c /= nr;
        }
        for mv in &moves {
            let image: usize = digits
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let (j, s) = mv[i * nr + r];
                    s * weight[j]
                })
                .sum();
            class_of[image] = count as u32;
        }
        count += 1;
    }
    Ok(OrbitClasses {
        prefix: prefix.to_vec(),
        num_values: nr,
        class_of,
        count,
    })
}

/// Number of orbits of assignments on the prefix set.
pub fn orbit_count_exhaustive(m: &SymmetryModel, prefix: &[usize]) -> Result<usize> {
    Ok(orbit_classes(m, prefix)?.count())
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Number of unlabeled graphs on `n` nodes, averaging `2^cycles` of the
/// induced action on node pairs over all `n!` permutations.
pub fn burnside_graph_count(n: usize) -> Result<u128> {
    if n > 10 {
        return Err(Error::input(format!(
            "burnside_graph_count supports n <= 10, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut index = vec![vec![0usize; n]; n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        index[i][j] = k;
        index[j][i] = k;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; pairs.len()];
    let mut sum: u128 = 0;
    let mut count: u128 = 0;
    loop {
        seen.iter_mut().for_each(|s| *s = false);
        let mut cycles = 0u32;
        for start in 0..pairs.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                let (i, j) = pairs[k];
                k = index[perm[i]][perm[j]];
            }
        }
        sum += 1u128 << cycles;
        count += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(sum / count)
}

/// Outcome of comparing emitted assignments against the oracle orbits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub orbits: usize,
    pub emitted: usize,
    /// Orbits no emitted assignment lies in, by a representative.
    pub missing: Vec<String>,
    /// Orbits hit more than once: a representative and the hit count.
    pub repeated: Vec<(String, usize)>,
    /// Emitted assignments not defined on exactly the prefix.
    pub malformed: Vec<String>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.repeated.is_empty() && self.malformed.is_empty()
    }
}

/// Checks that every orbit contains exactly one emitted assignment.
pub fn exact_cover_check(emitted: &[PartialAssignment], classes: &OrbitClasses) -> CoverReport {
    let mut hits = vec![0usize; classes.count()];
    let mut first = vec![usize::MAX; classes.count()];
    let mut report = CoverReport {
        orbits: classes.count(),
        emitted: emitted.len(),
        ..CoverReport::default()
    };
    for (i, x) in emitted.iter().enumerate() {
        match classes.class_of(x) {
            Some(c) => {
                hits[c] += 1;
                if first[c] == usize::MAX {
                    first[c] = i;
                }
            }
            None => report.malformed.push(x.to_string()),
        }
    }
    let mut rep = vec![usize::MAX; classes.count()];
    for code in 0..classes.total() {
        let c = classes.class_of[code] as usize;
        if rep[c] == usize::MAX {
            rep[c] = code;
        }
    }
    for c in 0..classes.count() {
        match hits[c] {
            0 => report.missing.push(classes.decode(rep[c]).to_string()),
            1 => {}
            h => report.repeated.push((emitted[first[c]].to_string(), h)),
        }
    }
    report
}
