//! Ordered partitions and equitable refinement.

use std::collections::VecDeque;

/// Compressed adjacency lists.
#[derive(Clone, Debug, Default)]
pub(crate) struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Csr {
    pub(crate) fn build(n: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) -> Csr {
        let mut csr = Csr::default();
        csr.rebuild(n, edges);
        csr
    }

    /// Refills `self`, reusing its buffers.
    pub(crate) fn rebuild(&mut self, n: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) {
        self.offsets.clear();
        self.offsets.resize(n + 1, 0);
        for (a, b) in edges.clone() {
            self.offsets[a as usize + 1] += 1;
            self.offsets[b as usize + 1] += 1;
        }
        for v in 0..n {
            self.offsets[v + 1] += self.offsets[v];
        }
        self.targets.clear();
        self.targets.resize(self.offsets[n] as usize, 0);
        // offsets[v] serves as the fill pointer of v, then is shifted back
        for (a, b) in edges {
            let fa = &mut self.offsets[a as usize];
            self.targets[*fa as usize] = b;
            *fa += 1;
            let fb = &mut self.offsets[b as usize];
            self.targets[*fb as usize] = a;
            *fb += 1;
        }
        for v in (1..=n).rev() {
            self.offsets[v] = self.offsets[v - 1];
        }
        self.offsets[0] = 0;
    }

    #[inline]
    pub(crate) fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }
}

/// Cells are contiguous runs of `elems`, identified by their first position.
#[derive(Clone, Debug, Default)]
pub(crate) struct OrderedPartition {
    pub(crate) elems: Vec<u32>,
    pub(crate) pos: Vec<u32>,
    start_of: Vec<u32>,
    len_at: Vec<u32>,
    cells: usize,
}

impl OrderedPartition {
    /// Cells ordered by color value.
    pub(crate) fn by_color(colors: &[u32]) -> OrderedPartition {
        let n = colors.len();
        let mut elems: Vec<u32> = (0..n as u32).collect();
        elems.sort_by_key(|&v| (colors[v as usize], v));
        let mut p = OrderedPartition {
            pos: vec![0; n],
            start_of: vec![0; n],
            len_at: vec![0; n],
            elems,
            cells: 0,
        };
        let mut i = 0;
        while i < n {
            let c = colors[p.elems[i] as usize];
            let mut j = i;
            while j < n && colors[p.elems[j] as usize] == c {
                j += 1;
            }
            p.set_cell(i, j - i);
            i = j;
        }
        p
    }

    /// Cells are the runs of `elems` beginning at `starts`, in order.
    pub(crate) fn from_runs(elems: &[u32], starts: &[u32], into: &mut OrderedPartition) {
        let n = elems.len();
        into.elems.clear();
        into.elems.extend_from_slice(elems);
        into.pos.resize(n, 0);
        into.start_of.resize(n, 0);
        into.len_at.clear();
        into.len_at.resize(n, 0);
        into.cells = 0;
        for (k, &s) in starts.iter().enumerate() {
            let end = starts.get(k + 1).map_or(n, |&e| e as usize);
            into.set_cell(s as usize, end - s as usize);
        }
    }

    pub(crate) fn from_cells(n: usize, cells: &[Vec<usize>]) -> OrderedPartition {
        let elems: Vec<u32> = cells.iter().flatten().map(|&v| v as u32).collect();
        debug_assert_eq!(elems.len(), n);
        let mut p = OrderedPartition {
            pos: vec![0; n],
            start_of: vec![0; n],
            len_at: vec![0; n],
            elems,
            cells: 0,
        };
        let mut i = 0;
        for cell in cells {
            p.set_cell(i, cell.len());
            i += cell.len();
        }
        p
    }

    /// Overwrites `self` with `other`, reusing allocations.
    pub(crate) fn copy_from(&mut self, other: &OrderedPartition) {
        self.elems.clone_from(&other.elems);
        self.pos.clone_from(&other.pos);
        self.start_of.clone_from(&other.start_of);
        self.len_at.clone_from(&other.len_at);
        self.cells = other.cells;
    }

    pub(crate) fn start_of(&self, v: usize) -> usize {
        self.start_of[v] as usize
    }

    fn set_cell(&mut self, start: usize, len: usize) {
        for k in start..start + len {
            let v = self.elems[k] as usize;
            self.pos[v] = k as u32;
            self.start_of[v] = start as u32;
        }
        self.len_at[start] = len as u32;
        self.cells += 1;
    }

    pub(crate) fn len(&self) -> usize {
        self.elems.len()
    }

    pub(crate) fn cell_count(&self) -> usize {
        self.cells
    }

    pub(crate) fn is_discrete(&self) -> bool {
        self.cells == self.elems.len()
    }

    pub(crate) fn cell_starts(&self) -> CellStarts<'_> {
        CellStarts { p: self, next: 0 }
    }

    pub(crate) fn cell(&self, start: usize) -> &[u32] {
        &self.elems[start..start + self.len_at[start] as usize]
    }

    /// First non-singleton cell, if any.
    pub(crate) fn target_cell(&self) -> Option<usize> {
        self.cell_starts().find(|&s| self.len_at[s] > 1)
    }

    pub(crate) fn to_cells(&self) -> Vec<Vec<usize>> {
        self.cell_starts()
            .map(|s| {
                let mut c: Vec<usize> = self.cell(s).iter().map(|&v| v as usize).collect();
                c.sort_unstable();
                c
            })
            .collect()
    }

    /// Splits `v` off the front of its cell. Returns the singleton's start.
    pub(crate) fn individualize(&mut self, v: usize) -> usize {
        let start = self.start_of[v] as usize;
        let len = self.len_at[start] as usize;
        if len == 1 {
            return start;
        }
        let at = self.pos[v] as usize;
        self.elems.swap(start, at);
        let moved = self.elems[at] as usize;
        self.pos[moved] = at as u32;
        self.pos[v] = start as u32;
        self.len_at[start] = 1;
        self.len_at[start + 1] = (len - 1) as u32;
        for k in start + 1..start + len {
            self.start_of[self.elems[k] as usize] = (start + 1) as u32;
        }
        self.cells += 1;
        start
    }
}

pub(crate) struct CellStarts<'a> {
    p: &'a OrderedPartition,
    next: usize,
}

impl Iterator for CellStarts<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.next >= self.p.len() {
            return None;
        }
        let s = self.next;
        self.next += self.p.len_at[s] as usize;
        Some(s)
    }
}

#[inline]
pub(crate) fn mix(h: u64, x: u64) -> u64 {
    let v = (h ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    v ^ (v >> 31)
}

fn sort_by_count(xs: &mut [u32], counts: &[u32]) {
    if xs.is_sorted_by_key(|&v| counts[v as usize]) {
        return;
    }
    if xs.len() <= 16 {
        for i in 1..xs.len() {
            let x = xs[i];
            let c = counts[x as usize];
            let mut j = i;
            while j > 0 && counts[xs[j - 1] as usize] > c {
                xs[j] = xs[j - 1];
                j -= 1;
            }
            xs[j] = x;
        }
    } else {
        xs.sort_unstable_by_key(|&v| counts[v as usize]);
    }
}

/// Scratch space for equitable refinement, reused across calls.
#[derive(Default)]
pub(crate) struct Refiner {
    counts: Vec<u32>,
    touched: Vec<u32>,
    touched_cells: Vec<u32>,
    touched_in_cell: Vec<u32>,
    tail: Vec<u32>,
    in_queue: Vec<bool>,
    queue: VecDeque<u32>,
    splitter: Vec<u32>,
    fragments: Vec<(u32, u32, u32)>,
}

impl Refiner {
    fn prepare(&mut self, n: usize) {
        if self.counts.len() != n {
            self.counts = vec![0; n];
            self.touched_in_cell = vec![0; n];
            self.tail = vec![0; n];
            self.in_queue = vec![false; n];
        }
        self.queue.clear();
    }

    /// Refines to the coarsest equitable partition finer than `p`, starting
    /// from the given splitter cells. Returns a hash of the refinement trace,
    /// which depends only on the ordered partition structure.
    pub(crate) fn refine(
        &mut self,
        adj: &Csr,
        p: &mut OrderedPartition,
        splitters: impl IntoIterator<Item = usize>,
    ) -> u64 {
        let n = p.len();
        self.prepare(n);
        for s in splitters {
            if !self.in_queue[s] {
                self.in_queue[s] = true;
                self.queue.push_back(s as u32);
            }
        }
        let mut trace = 0x243f_6a88_85a3_08d3u64;
        while let Some(w) = self.queue.pop_front() {
            let w = w as usize;
            self.in_queue[w] = false;
            if p.is_discrete() {
                continue;
            }
            self.splitter.clear();
            self.splitter.extend_from_slice(p.cell(w));
            for &v in &self.splitter {
                for &u in adj.neighbors(v as usize) {
                    let c = &mut self.counts[u as usize];
                    if *c == 0 {
                        self.touched.push(u);
                    }
                    *c += 1;
                }
            }
            for &u in &self.touched {
                let s = p.start_of[u as usize] as usize;
                if p.len_at[s] > 1 {
                    if self.touched_in_cell[s] == 0 {
                        self.touched_cells.push(s as u32);
                        self.tail[s] = s as u32 + p.len_at[s];
                    }
                    self.touched_in_cell[s] += 1;
                }
            }
            for &u in &self.touched {
                let u = u as usize;
                let s = p.start_of[u] as usize;
                let len = p.len_at[s];
                if len > 1 && self.touched_in_cell[s] < len {
                    self.tail[s] -= 1;
                    let t = self.tail[s] as usize;
                    let at = p.pos[u] as usize;
                    let other = p.elems[t];
                    p.elems.swap(at, t);
                    p.pos[other as usize] = at as u32;
                    p.pos[u] = t as u32;
                }
            }
            self.touched_cells.sort_unstable();
            trace = mix(trace, w as u64);
            for k in 0..self.touched_cells.len() {
                let start = self.touched_cells[k] as usize;
                trace = self.split_cell(p, start, trace);
            }
            for &s in &self.touched_cells {
                self.touched_in_cell[s as usize] = 0;
            }
            self.touched_cells.clear();
            for &u in &self.touched {
                self.counts[u as usize] = 0;
            }
            self.touched.clear();
        }
        mix(trace, p.cell_count() as u64)
    }

    fn split_cell(&mut self, p: &mut OrderedPartition, start: usize, mut trace: u64) -> u64 {
        let len = p.len_at[start] as usize;
        let touched = self.touched_in_cell[start] as usize;
        let counts = &self.counts;
        if touched == len {
            let first = counts[p.elems[start] as usize];
            if p.elems[start..start + len]
                .iter()
                .all(|&v| counts[v as usize] == first)
            {
                return trace;
            }
            sort_by_count(&mut p.elems[start..start + len], counts);
        } else {
            // untouched vertices (count 0) stay in front; touched ones were moved to the tail
            let tail = self.tail[start] as usize;
            sort_by_count(&mut p.elems[tail..start + len], counts);
        }
        // Fragments in ascending count order.
        self.fragments.clear();
        let mut i = start;
        while i < start + len {
            let c = counts[p.elems[i] as usize];
            let mut j = i + 1;
            while j < start + len && counts[p.elems[j] as usize] == c {
                j += 1;
            }
            self.fragments.push((i as u32, (j - i) as u32, c));
            i = j;
        }
        debug_assert!(self.fragments.len() > 1);
        trace = mix(trace, start as u64);
        trace = mix(trace, self.fragments.len() as u64);
        for &(fs, fl, c) in &self.fragments {
            trace = mix(trace, ((c as u64) << 32) | fl as u64);
            for k in fs as usize..(fs + fl) as usize {
                let v = p.elems[k] as usize;
                p.pos[v] = k as u32;
                p.start_of[v] = fs;
            }
            p.len_at[fs as usize] = fl;
        }
        p.cells += self.fragments.len() - 1;
        if self.in_queue[start] {
            for &(fs, _, _) in &self.fragments[1..] {
                self.in_queue[fs as usize] = true;
                self.queue.push_back(fs);
            }
        } else {
            let mut largest = 0;
            for (k, f) in self.fragments.iter().enumerate() {
                if f.1 > self.fragments[largest].1 {
                    largest = k;
                }
            }
            for (k, &(fs, _, _)) in self.fragments.iter().enumerate() {
                if k != largest {
                    self.in_queue[fs as usize] = true;
                    self.queue.push_back(fs);
                }
            }
        }
        trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(n: usize, edges: &[(u32, u32)]) -> Csr {
        Csr::build(n, edges.iter().copied())
    }

    fn refine_all(n: usize, edges: &[(u32, u32)], colors: &[u32]) -> Vec<Vec<usize>> {
        let adj = csr(n, edges);
        let mut p = OrderedPartition::by_color(colors);
        let starts: Vec<usize> = p.cell_starts().collect();
        Refiner::default().refine(&adj, &mut p, starts);
        p.to_cells()
    }

    #[test]
    fn star_separates_center() {
        let cells = refine_all(4, &[(0, 1), (0, 2), (0, 3)], &[0; 4]);
        assert_eq!(cells, vec![vec![1, 2, 3], vec![0]]);
    }

    #[test]
    fn cycle_stays_single_cell() {
        let edges: Vec<(u32, u32)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        assert_eq!(refine_all(6, &edges, &[0; 6]), vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn individualize_then_refine_path() {
        // path 0-1-2-3-4: individualizing an end makes it discrete
        let adj = csr(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let mut p = OrderedPartition::by_color(&[0; 5]);
        let mut r = Refiner::default();
        r.refine(&adj, &mut p, [0]);
        assert_eq!(p.cell_count(), 3);
        let s = p.individualize(0);
        r.refine(&adj, &mut p, [s]);
        assert!(p.is_discrete());
        assert_eq!(p.cell(0), &[0]);
    }
}
