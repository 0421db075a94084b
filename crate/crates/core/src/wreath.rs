//! The wreath product `Sym(R) wr Sym(U)`: a variable permutation `pi`
//! together with one value permutation `sigma(u)` per variable.
//!
//! Elements act on the right. A pair `(u, r)` goes to `(u^pi, r^sigma(u^pi))`,
//! so `sigma` is indexed by the image variable.

use serde::{Deserialize, Serialize};

use crate::assignment::PartialAssignment;
use crate::error::{Error, Result};
use crate::perm::{PermError, Permutation};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WreathElement {
    pi: Permutation,
    sigma: Vec<Permutation>,
}

impl WreathElement {
    pub fn new(pi: Permutation, sigma: Vec<Permutation>) -> Result<Self> {
        if sigma.len() != pi.degree() {
            return Err(PermError::DegreeMismatch {
                left: pi.degree(),
                right: sigma.len(),
            }
            .into());
        }
        if let Some(s) = sigma.windows(2).find(|w| w[0].degree() != w[1].degree()) {
            return Err(PermError::DegreeMismatch {
                left: s[0].degree(),
                right: s[1].degree(),
            }
            .into());
        }
        Ok(WreathElement { pi, sigma })
    }

    pub fn identity(num_vars: usize, num_values: usize) -> Self {
        WreathElement {
            pi: Permutation::identity(num_vars),
            sigma: vec![Permutation::identity(num_values); num_vars],
        }
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn sigma(&self, u: usize) -> &Permutation {
        &self.sigma[u]
    }

    pub fn num_vars(&self) -> usize {
        self.pi.degree()
    }

    pub fn num_values(&self) -> usize {
        self.sigma.first().map_or(0, |s| s.degree())
    }

    fn check(&self, other: &WreathElement) -> Result<()> {
        if self.num_vars() != other.num_vars() || self.num_values() != other.num_values() {
            return Err(PermError::DegreeMismatch {
                left: self.num_vars() * self.num_values().max(1),
                right: other.num_vars() * other.num_values().max(1),
            }
            .into());
        }
        Ok(())
    }

    /// `self` then `other`: `sigma(u) = sigma1(u^{pi2^-1}) sigma2(u)`.
    pub fn compose(&self, other: &WreathElement) -> Result<WreathElement> {
        self.check(other)?;
        let pi = self.pi.compose(&other.pi)?;
        let pi2_inv = other.pi.inverse();
        let sigma = (0..self.num_vars())
            .map(|u| self.sigma[pi2_inv.apply(u)].compose(&other.sigma[u]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WreathElement { pi, sigma })
    }

    /// `(pi^-1, tau)` with `tau(u) = sigma(u^pi)^-1`.
    pub fn inverse(&self) -> WreathElement {
        let tau = (0..self.num_vars())
            .map(|u| self.sigma[self.pi.apply(u)].inverse())
            .collect();
        WreathElement {
            pi: self.pi.inverse(),
            sigma: tau,
        }
    }

    pub fn act_pair(&self, u: usize, r: usize) -> (usize, usize) {
        let v = self.pi.apply(u);
        (v, self.sigma[v].apply(r))
    }

    /// `X^g(u) = X(u^{pi^-1})^{sigma(u)}`.
    pub fn act_assignment(&self, x: &PartialAssignment) -> PartialAssignment {
        PartialAssignment::from_pairs(x.iter().map(|(u, r)| self.act_pair(u, r)))
            .expect("a bijection keeps variables distinct")
    }

    /// As a permutation of the points `0..n` (variables) followed by
    /// `n + u * |R| + r` (pairs).
    pub fn to_domain(&self) -> Permutation {
        let n = self.num_vars();
        let k = self.num_values();
        let mut images = Vec::with_capacity(n + n * k);
        images.extend((0..n).map(|u| self.pi.apply(u)));
        for u in 0..n {
            for r in 0..k {
                let (v, s) = self.act_pair(u, r);
                images.push(n + v * k + s);
            }
        }
        Permutation::from_images(images).expect("wreath action is bijective")
    }

    /// Inverse of [`WreathElement::to_domain`]. Fails when `p` does not
    /// respect the block structure.
    pub fn from_domain(
        p: &Permutation,
        num_vars: usize,
        num_values: usize,
    ) -> Result<WreathElement> {
        let n = num_vars;
        let k = num_values;
        if p.degree() != n + n * k {
            return Err(PermError::DegreeMismatch {
                left: n + n * k,
                right: p.degree(),
            }
            .into());
        }
        let not_wreath = || Error::input("permutation does not preserve the variable/value blocks");
        let mut pi = Vec::with_capacity(n);
        for u in 0..n {
            let v = p.apply(u);
            if v >= n {
                return Err(not_wreath());
            }
            pi.push(v);
        }
        let mut sigma = vec![vec![0usize; k]; n];
        for (u, &pu) in pi.iter().enumerate() {
            for (r, image) in sigma[pu].iter_mut().enumerate() {
                let q = p.apply(n + u * k + r);
                if q < n || (q - n) / k != pu {
                    return Err(not_wreath());
                }
                *image = (q - n) % k;
            }
        }
        Ok(WreathElement {
            pi: Permutation::from_images(pi)?,
            sigma: sigma
                .into_iter()
                .map(Permutation::from_images)
                .collect::<Result<Vec<_>, _>>()?,
        })
    }
}
