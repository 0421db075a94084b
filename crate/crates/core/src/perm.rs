//! Permutations on dense index domains and elementary group computations.
//!
//! Permutations act on the right: `i^p` is `p.apply(i)`, and `p.compose(q)`
//! applies `p` first and then `q`. Orbits are computed breadth-first with the
//! generators visited in their given order, so witnesses are reproducible.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("image list is not a bijection on 0..{degree}")]
    NotBijective { degree: usize },
    #[error("point {point} out of range for degree {degree}")]
    OutOfRange { point: usize, degree: usize },
    #[error("group closure exceeded cap of {cap} elements")]
    ClosureOverflow { cap: usize },
}

/// A bijection on `0..degree`; position `i` holds `i^p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let degree = images.len();
        let mut seen = vec![false; degree];
        for &i in &images {
            if i >= degree || seen[i] {
                return Err(PermError::NotBijective { degree });
            }
            seen[i] = true;
        }
        Ok(Permutation {
            images: images.into_iter().map(|i| i as u32).collect(),
        })
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1], &[2, 3]]`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut moved = vec![false; degree];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                if a >= degree {
                    return Err(PermError::OutOfRange { point: a, degree });
                }
                if moved[a] {
                    return Err(PermError::NotBijective { degree });
                }
                moved[a] = true;
                images[a] = cycle[(k + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    pub(crate) fn from_raw(images: Vec<u32>) -> Self {
        debug_assert!(Self::from_images(images.iter().map(|&i| i as usize).collect()).is_ok());
        Permutation { images }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// `self` first, then `other`: maps `i` to `(i^self)^other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(self.then(other))
    }

    #[inline]
    pub(crate) fn then(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self
                .images
                .iter()
                .map(|&i| other.images[i as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `g^self = self^-1 g self`, the conjugate acting on relabeled points.
    pub fn conjugate(&self, g: &Permutation) -> Permutation {
        let mut out = vec![0u32; self.degree()];
        for (i, &gi) in g.images.iter().enumerate() {
            out[self.images[i] as usize] = self.images[gi as usize];
        }
        Permutation { images: out }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &j)| *i as u32 != j)
            .map(|(i, _)| i)
    }
}

/// Generators of a permutation group; an empty list is the trivial group.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct GeneratorSet {
    degree: usize,
    generators: Vec<Permutation>,
}

impl GeneratorSet {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self, PermError> {
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(PermError::DegreeMismatch {
                left: degree,
                right: g.degree(),
            });
        }
        Ok(GeneratorSet { degree, generators })
    }

    pub fn trivial(degree: usize) -> Self {
        GeneratorSet {
            degree,
            generators: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub(crate) fn push_unchecked(&mut self, g: Permutation) {
        debug_assert_eq!(g.degree(), self.degree);
        self.generators.push(g);
    }

    /// Conjugates every generator by `by`, giving generators of `H^by`.
    pub fn conjugated(&self, by: &Permutation) -> GeneratorSet {
        GeneratorSet {
            degree: self.degree,
            generators: self.generators.iter().map(|g| by.conjugate(g)).collect(),
        }
    }

    fn check_point(&self, point: usize) -> Result<(), PermError> {
        if point >= self.degree {
            Err(PermError::OutOfRange {
                point,
                degree: self.degree,
            })
        } else {
            Ok(())
        }
    }
}

/// An orbit together with, for every member `m`, a group element taking the
/// representative to `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitTransversal {
    representative: usize,
    members: Vec<usize>,
    witnesses: Vec<Permutation>,
    index: HashMap<usize, usize>,
}

impl OrbitTransversal {
    pub fn representative(&self) -> usize {
        self.representative
    }

    /// Members in breadth-first discovery order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.index.contains_key(&point)
    }

    /// Element `w` with `representative^w = member`.
    pub fn witness(&self, member: usize) -> Option<&Permutation> {
        self.index.get(&member).map(|&k| &self.witnesses[k])
    }
}

pub fn orbit_with_transversal(
    gens: &GeneratorSet,
    point: usize,
) -> Result<OrbitTransversal, PermError> {
    gens.check_point(point)?;
    let mut members = vec![point];
    let mut witnesses = vec![Permutation::identity(gens.degree())];
    let mut index = HashMap::from([(point, 0usize)]);
    let mut head = 0;
    while head < members.len() {
        let m = members[head];
        for g in gens.generators() {
            let image = g.apply(m);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(image) {
                e.insert(members.len());
                witnesses.push(witnesses[head].then(g));
                members.push(image);
            }
        }
        head += 1;
    }
    Ok(OrbitTransversal {
        representative: point,
        members,
        witnesses,
        index,
    })
}

/// Orbit of `point`, breadth-first. Panics if `point` is out of range.
pub fn orbit(gens: &GeneratorSet, point: usize) -> Vec<usize> {
    assert!(point < gens.degree(), "point {point} out of range");
    let mut seen = vec![false; gens.degree()];
    seen[point] = true;
    let mut out = vec![point];
    let mut head = 0;
    while head < out.len() {
        let m = out[head];
        for g in gens.generators() {
            let image = g.apply(m);
            if !seen[image] {
                seen[image] = true;
                out.push(image);
            }
        }
        head += 1;
    }
    out
}

pub fn same_orbit(gens: &GeneratorSet, u: usize, v: usize) -> bool {
    u == v || orbit(gens, u).contains(&v)
}

pub fn min_in_orbit(gens: &GeneratorSet, point: usize) -> usize {
    orbit(gens, point).into_iter().min().unwrap_or(point)
}

/// For every point, the minimum element of its orbit.
pub fn orbit_minima(gens: &GeneratorSet) -> Vec<usize> {
    let mut uf = UnionFind::new(gens.degree());
    for g in gens.generators() {
        for (i, &j) in g.images().iter().enumerate() {
            uf.union(i, j as usize);
        }
    }
    (0..gens.degree()).map(|i| uf.find(i)).collect()
}

/// Every element of the generated group, breadth-first from the identity.
pub fn group_closure(gens: &GeneratorSet, cap: usize) -> Result<Vec<Permutation>, PermError> {
    let id = Permutation::identity(gens.degree());
    let mut seen = HashSet::from([id.clone()]);
    let mut elements = vec![id];
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for g in gens.generators() {
            let next = elements[k].then(g);
            if seen.insert(next.clone()) {
                if elements.len() >= cap {
                    return Err(PermError::ClosureOverflow { cap });
                }
                queue.push_back(elements.len());
                elements.push(next);
            }
        }
    }
    Ok(elements)
}

/// Union-find whose roots are always the minimum element of their class.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo as u32;
        true
    }
}
