//! Individualization-refinement search for canonical labelings.
//!
//! Leaves are ordered by their sequence of node invariants (refinement trace
//! hashes along the path), then by the relabeled edge list; the canonical
//! leaf is the maximum. Automorphisms are found when two leaves relabel the
//! graph identically, and are used to skip children that lie in a known
//! orbit of the pointwise stabilizer of the current path.

use std::cmp::Ordering;

use super::partition::{mix, Csr, OrderedPartition, Refiner};
use crate::perm::UnionFind;

pub(crate) struct SearchOutcome {
    /// vertex -> canonical position
    pub(crate) labeling: Vec<u32>,
    pub(crate) generators: Vec<Vec<u32>>,
    pub(crate) aut_order: u128,
}

#[derive(Clone)]
struct Leaf {
    path: Vec<u32>,
    invs: Vec<u64>,
    labeling: Vec<u32>,
    /// Computed on first use.
    cert: Option<Vec<u64>>,
}

enum Flow {
    Continue,
    Backjump(usize),
}

/// Buffers for choosing an extension variable, kept between calls.
#[derive(Default)]
pub(crate) struct Selection {
    pub(crate) candidates: Vec<usize>,
    pub(crate) vertices: Vec<usize>,
    pub(crate) inv: Vec<u64>,
    pub(crate) tied: Vec<usize>,
    pub(crate) extra: Vec<(u32, u32)>,
}

/// Reusable canonical labeling workspace.
#[derive(Default)]
pub(crate) struct Canonizer {
    pub(crate) selection: Selection,
    refiner: Refiner,
    pub(crate) adj: Csr,
    pub(crate) root: OrderedPartition,
    root_inv: u64,
    stable: bool,
    order: Vec<u32>,
    runs: Vec<u32>,
    next_runs: Vec<u32>,
    colors: Vec<u32>,
    color_part: OrderedPartition,
    color_starts: Vec<usize>,
    hashes: Vec<u64>,
    next: Vec<u64>,
    keys: Vec<u128>,
    pool: Vec<OrderedPartition>,
    stamp: Vec<u32>,
    cert: Vec<u64>,
}

impl Canonizer {
    /// Refines the color partition of the graph held in `self.adj`.
    pub(crate) fn prepare(&mut self, colors: &[u32]) {
        if self.colors != colors {
            self.colors.clear();
            self.colors.extend_from_slice(colors);
            self.color_part = OrderedPartition::by_color(colors);
            self.color_starts = self.color_part.cell_starts().collect();
        }
        self.root.copy_from(&self.color_part);
        self.root_inv =
            self.refiner
                .refine(&self.adj, &mut self.root, self.color_starts.iter().copied());
    }

    /// Like `prepare`, but takes the root partition from the hashes of the
    /// last `local_invariants` call, continued until stable. Hash
    /// refinement that has stopped splitting is equitable up to hash
    /// collisions, and a collision only leaves the partition coarser, so no
    /// further refinement is run. Does not need `self.adj`.
    pub(crate) fn prepare_hashed(
        &mut self,
        base: &[(u32, u32)],
        extra: &[(u32, u32)],
        colors: &[u32],
    ) {
        let cells = self.stabilize_hashes(base, extra, colors);
        OrderedPartition::from_runs(&self.order, &self.runs, &mut self.root);
        self.root_inv = mix(0x243f_6a88_85a3_08d3, cells as u64);
    }

    /// Rounds of neighborhood color hashing on the `base` plus `extra`
    /// edges, evaluated at `vertices`. Isomorphism invariant, and much
    /// cheaper than refinement.
    pub(crate) fn local_invariants(
        &mut self,
        base: &[(u32, u32)],
        extra: &[(u32, u32)],
        colors: &[u32],
        rounds: usize,
        vertices: &[usize],
        out: &mut Vec<u64>,
    ) {
        self.hashes.clear();
        self.hashes.extend(colors.iter().map(|&c| spread(c as u64)));
        self.stable = false;
        for _ in 0..rounds {
            self.hash_round(base, extra);
        }
        out.clear();
        out.extend(vertices.iter().map(|&v| self.hashes[v]));
    }

    fn hash_round(&mut self, base: &[(u32, u32)], extra: &[(u32, u32)]) {
        let (h, next) = (&self.hashes, &mut self.next);
        next.clear();
        next.resize(h.len(), 0);
        for &(a, b) in base.iter().chain(extra) {
            next[a as usize] = next[a as usize].wrapping_add(h[b as usize]);
            next[b as usize] = next[b as usize].wrapping_add(h[a as usize]);
        }
        for (h, around) in self.hashes.iter_mut().zip(&self.next) {
            *h = spread(mix(*h, *around));
        }
    }

    /// Continues the hashing of the last `local_invariants` call until the
    /// classes stop splitting, and returns their number. Classes start as
    /// the (color, hash) classes and are only ever split, each round by
    /// the new hashes, so they never mix colors. When every vertex ends up
    /// in a class of its own the graph has no nontrivial automorphism.
    pub(crate) fn stabilize_hashes(
        &mut self,
        base: &[(u32, u32)],
        extra: &[(u32, u32)],
        colors: &[u32],
    ) -> usize {
        if self.stable {
            return self.runs.len();
        }
        let n = self.hashes.len();
        self.keys.clear();
        self.keys.extend(
            (0..n).map(|v| {
                ((colors[v] as u128) << 96) | ((self.hashes[v] as u128) << 32) | v as u128
            }),
        );
        self.keys.sort_unstable();
        self.order.clear();
        self.order.extend(self.keys.iter().map(|&k| k as u32));
        self.runs.clear();
        for i in 0..n {
            if i == 0 || self.keys[i] >> 32 != self.keys[i - 1] >> 32 {
                self.runs.push(i as u32);
            }
        }
        while self.runs.len() < n {
            self.hash_round(base, extra);
            let hashes = &self.hashes;
            self.next_runs.clear();
            for k in 0..self.runs.len() {
                let start = self.runs[k] as usize;
                let end = self.runs.get(k + 1).map_or(n, |&e| e as usize);
                self.next_runs.push(start as u32);
                let run = &mut self.order[start..end];
                let h0 = hashes[run[0] as usize];
                if run.iter().all(|&v| hashes[v as usize] == h0) {
                    continue;
                }
                run.sort_unstable_by_key(|&v| hashes[v as usize]);
                for i in 1..run.len() {
                    if hashes[run[i] as usize] != hashes[run[i - 1] as usize] {
                        self.next_runs.push((start + i) as u32);
                    }
                }
            }
            if self.next_runs.len() == self.runs.len() {
                break;
            }
            std::mem::swap(&mut self.runs, &mut self.next_runs);
        }
        self.stable = true;
        self.runs.len()
    }

    /// Searches from the prepared root partition.
    pub(crate) fn search(&mut self) -> SearchOutcome {
        if self.root.is_discrete() {
            return SearchOutcome {
                labeling: self.root.pos.clone(),
                generators: Vec::new(),
                aut_order: 1,
            };
        }
        let root = std::mem::take(&mut self.root);
        let mut search = Search {
            adj: &self.adj,
            refiner: &mut self.refiner,
            pool: &mut self.pool,
            stamp: &mut self.stamp,
            cert: &mut self.cert,
            path: Vec::new(),
            invs: vec![self.root_inv],
            first: None,
            best: None,
            generators: Vec::new(),
        };
        search.visit(&root, true);
        let aut_order = search.aut_order();
        let best = search
            .best
            .take()
            .expect("search reaches at least one leaf");
        let generators = std::mem::take(&mut search.generators);
        self.root = root;
        SearchOutcome {
            labeling: best.labeling,
            generators,
            aut_order,
        }
    }

    pub(crate) fn run(&mut self, colors: &[u32]) -> SearchOutcome {
        self.prepare(colors);
        self.search()
    }
}

/// Keeps sums of hashes from colliding through simple linear relations.
#[inline]
fn spread(h: u64) -> u64 {
    let h = (h ^ (h >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^ (h >> 29)
}

struct Search<'a> {
    adj: &'a Csr,
    refiner: &'a mut Refiner,
    pool: &'a mut Vec<OrderedPartition>,
    stamp: &'a mut Vec<u32>,
    cert: &'a mut Vec<u64>,
    path: Vec<u32>,
    /// `invs[d]` is the invariant of the node at depth `d` (root at 0).
    invs: Vec<u64>,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<u32>>,
}

fn compare_prefix(cur: &[u64], best: &[u64]) -> Ordering {
    let m = cur.len().min(best.len());
    match cur[..m].cmp(&best[..m]) {
        Ordering::Equal if cur.len() > best.len() => Ordering::Greater,
        o => o,
    }
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Search<'_> {
    fn visit(&mut self, part: &OrderedPartition, eq_first: bool) -> Flow {
        let depth = self.path.len();
        let Some(target) = part.target_cell() else {
            return self.leaf(part, eq_first);
        };
        let mut members: Vec<u32> = part.cell(target).to_vec();
        members.sort_unstable();
        if self.pool.len() <= depth {
            self.pool.resize_with(depth + 1, OrderedPartition::default);
        }
        let mut child = std::mem::take(&mut self.pool[depth]);
        let mut explored: Vec<u32> = Vec::new();
        let mut orbits: Option<(usize, UnionFind)> = None;
        let mut flow = Flow::Continue;
        for &w in &members {
            if !explored.is_empty() {
                let stale = orbits
                    .as_ref()
                    .is_none_or(|(seen, _)| *seen != self.generators.len());
                if stale {
                    if self.generators.is_empty() {
                        orbits = None;
                    } else {
                        orbits = Some((self.generators.len(), self.stabilizer_orbits(depth)));
                    }
                }
                if let Some((_, uf)) = orbits.as_mut() {
                    let root = uf.find(w as usize);
                    if explored.iter().any(|&e| uf.find(e as usize) == root) {
                        continue;
                    }
                }
            }
            explored.push(w);
            child.copy_from(part);
            let s = child.individualize(w as usize);
            let inv = self.refiner.refine(self.adj, &mut child, [s]);
            self.path.push(w);
            self.invs.push(inv);
            let child_eq_first = eq_first
                && self
                    .first
                    .as_ref()
                    .is_none_or(|f| f.invs.get(depth + 1) == Some(&inv));
            let prune = !child_eq_first
                && self
                    .best
                    .as_ref()
                    .is_some_and(|b| compare_prefix(&self.invs, &b.invs) == Ordering::Less);
            let f = if prune {
                Flow::Continue
            } else {
                self.visit(&child, child_eq_first)
            };
            self.path.pop();
            self.invs.pop();
            if let Flow::Backjump(level) = f {
                if level < depth {
                    flow = f;
                    break;
                }
            }
        }
        self.pool[depth] = child;
        flow
    }

    fn make_leaf(&self, part: &OrderedPartition, cert: Option<Vec<u64>>) -> Leaf {
        Leaf {
            path: self.path.clone(),
            invs: self.invs.clone(),
            labeling: part.pos.clone(),
            cert,
        }
    }

    fn leaf(&mut self, part: &OrderedPartition, eq_first: bool) -> Flow {
        if self.first.is_none() {
            let leaf = self.make_leaf(part, None);
            self.best = Some(leaf.clone());
            self.first = Some(leaf);
            return Flow::Continue;
        }
        if eq_first {
            let first = self.first.as_ref().unwrap();
            if first.invs == self.invs {
                let gamma = automorphism(&first.labeling, &part.elems);
                if is_automorphism(self.adj, &gamma, self.stamp) {
                    let back = common_prefix(&self.path, &first.path);
                    self.generators.push(gamma);
                    return Flow::Backjump(back);
                }
            }
        }
        let best = self.best.as_mut().unwrap();
        let mut order = self.invs.cmp(&best.invs);
        let mut cert = None;
        if order == Ordering::Equal {
            let best_cert = best.cert.get_or_insert_with(|| {
                let mut c = Vec::new();
                certificate(self.adj, &best.labeling, &mut c);
                c
            });
            certificate(self.adj, &part.pos, self.cert);
            order = self.cert.as_slice().cmp(best_cert.as_slice());
            cert = Some(self.cert.clone());
        }
        let best = self.best.as_ref().unwrap();
        match order {
            Ordering::Less => Flow::Continue,
            Ordering::Greater => {
                self.best = Some(self.make_leaf(part, cert));
                Flow::Continue
            }
            Ordering::Equal => {
                let back = common_prefix(&self.path, &best.path);
                let gamma = automorphism(&best.labeling, &part.elems);
                self.generators.push(gamma);
                Flow::Backjump(back)
            }
        }
    }

    fn fixes_prefix(g: &[u32], prefix: &[u32]) -> bool {
        prefix.iter().all(|&v| g[v as usize] == v)
    }

    fn orbits_fixing(&self, prefix: &[u32]) -> UnionFind {
        let mut uf = UnionFind::new(self.adj.len());
        for g in &self.generators {
            if Self::fixes_prefix(g, prefix) {
                for (i, &j) in g.iter().enumerate() {
                    uf.union(i, j as usize);
                }
            }
        }
        uf
    }

    fn stabilizer_orbits(&self, depth: usize) -> UnionFind {
        self.orbits_fixing(&self.path[..depth])
    }

    /// Product of the basic orbit lengths along the first path.
    fn aut_order(&self) -> u128 {
        let Some(first) = &self.first else {
            return 1;
        };
        if self.generators.is_empty() {
            return 1;
        }
        let n = self.adj.len();
        let mut order: u128 = 1;
        for d in 0..first.path.len() {
            let mut uf = self.orbits_fixing(&first.path[..d]);
            let root = uf.find(first.path[d] as usize);
            let size = (0..n).filter(|&v| uf.find(v) == root).count() as u128;
            order = order.saturating_mul(size);
        }
        order
    }
}

/// Relabeled edge list, sorted, as packed `(lo << 32) | hi` pairs.
fn certificate(adj: &Csr, labeling: &[u32], out: &mut Vec<u64>) {
    out.clear();
    for v in 0..adj.len() {
        let pv = labeling[v];
        for &u in adj.neighbors(v) {
            let pu = labeling[u as usize];
            if pv < pu {
                out.push(((pv as u64) << 32) | pu as u64);
            }
        }
    }
    out.sort_unstable();
}

/// Maps the vertex at each position of the reference leaf to the vertex at
/// the same position of the current leaf.
fn automorphism(reference: &[u32], current_elems: &[u32]) -> Vec<u32> {
    reference
        .iter()
        .map(|&pos| current_elems[pos as usize])
        .collect()
}

/// Colors are respected by construction, so only edges need checking.
fn is_automorphism(adj: &Csr, gamma: &[u32], stamp: &mut Vec<u32>) -> bool {
    let n = adj.len();
    stamp.clear();
    stamp.resize(n, u32::MAX);
    for v in 0..n {
        let gv = gamma[v] as usize;
        let nv = adj.neighbors(v);
        if nv.len() != adj.neighbors(gv).len() {
            return false;
        }
        for &u in adj.neighbors(gv) {
            stamp[u as usize] = v as u32;
        }
        if nv
            .iter()
            .any(|&u| stamp[gamma[u as usize] as usize] != v as u32)
        {
            return false;
        }
    }
    true
}
