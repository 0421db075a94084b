//! Partial assignments and the group actions on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::encode::ValueMode;
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// A map from a set of variables to values, kept sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartialAssignment {
    bindings: Vec<(u32, u32)>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        PartialAssignment::default()
    }

    /// Fails if a variable is bound twice.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut bindings: Vec<(u32, u32)> = pairs
            .into_iter()
            .map(|(u, r)| (u as u32, r as u32))
            .collect();
        bindings.sort_unstable();
        if let Some(w) = bindings.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::input(format!("variable {} bound twice", w[0].0)));
        }
        Ok(PartialAssignment { bindings })
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, u: usize) -> Option<usize> {
        self.bindings
            .binary_search_by_key(&(u as u32), |b| b.0)
            .ok()
            .map(|i| self.bindings[i].1 as usize)
    }

    pub fn contains(&self, u: usize) -> bool {
        self.get(u).is_some()
    }

    /// Inserts or overwrites the binding of `u`.
    pub fn insert(&mut self, u: usize, r: usize) {
        match self.bindings.binary_search_by_key(&(u as u32), |b| b.0) {
            Ok(i) => self.bindings[i].1 = r as u32,
            Err(i) => self.bindings.insert(i, (u as u32, r as u32)),
        }
    }

    pub fn with(&self, u: usize, r: usize) -> Self {
        let b = (u as u32, r as u32);
        let i = self.bindings.partition_point(|x| x.0 < b.0);
        let rest = match self.bindings.get(i) {
            Some(x) if x.0 == b.0 => i + 1,
            _ => i,
        };
        let mut bindings = Vec::with_capacity(self.bindings.len() + 1);
        bindings.extend_from_slice(&self.bindings[..i]);
        bindings.push(b);
        bindings.extend_from_slice(&self.bindings[rest..]);
        PartialAssignment { bindings }
    }

    /// Bindings in increasing variable order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.bindings.iter().map(|&(u, r)| (u as usize, r as usize))
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.bindings.iter().map(|b| b.0 as usize)
    }

    pub fn restrict(&self, vars: &[usize]) -> Self {
        PartialAssignment {
            bindings: self
                .bindings
                .iter()
                .copied()
                .filter(|b| vars.contains(&(b.0 as usize)))
                .collect(),
        }
    }
}

impl fmt::Display for PartialAssignment {
    /// Literal form, 1-based: value 0 prints as `-u`, value 1 as `u`, others as `u=r`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (u, r) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            match r {
                0 => write!(f, "-{}", u + 1)?,
                1 => write!(f, "{}", u + 1)?,
                _ => write!(f, "{}={}", u + 1, r)?,
            }
        }
        Ok(())
    }
}

/// `X^gamma` for a domain permutation `gamma`.
///
/// Global mode: `gamma` permutes the `num_vars` variables and
/// `X^gamma(u^gamma) = X(u)`. Phase mode: `gamma` also acts on the pair points
/// `num_vars + u * num_values + r` and each binding `(u, r)` moves to the
/// pair it is mapped to.
pub fn act(
    gamma: &Permutation,
    x: &PartialAssignment,
    mode: ValueMode,
    num_vars: usize,
    num_values: usize,
) -> PartialAssignment {
    let mut bindings: Vec<(u32, u32)> = match mode {
        ValueMode::Global => x
            .bindings
            .iter()
            .map(|&(u, r)| (gamma.apply(u as usize) as u32, r))
            .collect(),
        ValueMode::Phase => x
            .bindings
            .iter()
            .map(|&(u, r)| {
                let q = gamma.apply(num_vars + u as usize * num_values + r as usize) - num_vars;
                ((q / num_values) as u32, (q % num_values) as u32)
            })
            .collect(),
    };
    bindings.sort_unstable();
    PartialAssignment { bindings }
}
