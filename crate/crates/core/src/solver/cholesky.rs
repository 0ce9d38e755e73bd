//! Envelope (skyline) Cholesky factorization with reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::SparseSym;

/// Reverse Cuthill-McKee ordering. Returns `perm` with `perm[old] = new`.
pub fn reverse_cuthill_mckee(m: &SparseSym) -> Vec<usize> {
    let n = m.dim();
    let csr = m.csr();
    let neighbors = |v: usize| csr.col_idx[csr.row_ptr[v]..csr.row_ptr[v + 1]].iter().copied().filter(move |&u| u != v);
    let degree: Vec<usize> = (0..n).map(|v| neighbors(v).count()).collect();

    let bfs_levels = |start: usize, mark: &mut Vec<bool>| -> Vec<Vec<usize>> {
        let mut levels = vec![vec![start]];
        let mut seen = vec![start];
        mark[start] = true;
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for u in neighbors(v) {
                    if !mark[u] {
                        mark[u] = true;
                        seen.push(u);
                        next.push(u);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        for v in seen {
            mark[v] = false;
        }
        levels
    };

    let mut visited = vec![false; n];
    let mut scratch = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start node (George-Liu).
        let mut start = seed;
        let mut depth = bfs_levels(start, &mut scratch).len();
        for _ in 0..8 {
            let levels = bfs_levels(start, &mut scratch);
            let cand = *levels.last().unwrap().iter().min_by_key(|&&v| (degree[v], v)).unwrap();
            let d = bfs_levels(cand, &mut scratch).len();
            if d <= depth {
                break;
            }
            depth = d;
            start = cand;
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = neighbors(v).filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    let mut perm = vec![0; n];
    for (pos, &v) in order.iter().rev().enumerate() {
        perm[v] = pos;
    }
    perm
}

#[derive(Clone, Debug)]
pub struct SkylineCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(m: &SparseSym) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("cholesky matrix"));
        }
        let n = m.dim();
        let perm = reverse_cuthill_mckee(m);
        let mut first: Vec<usize> = (0..n).collect();
        for &(r, c, _) in m.entries() {
            let (a, b) = (perm[r], perm[c]);
            let (lo, hi) = (a.min(b), a.max(b));
            first[hi] = first[hi].min(lo);
        }
        let mut offset = vec![0; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for &(r, c, v) in m.entries() {
            let (a, b) = (perm[r], perm[c]);
            let (lo, hi) = (a.min(b), a.max(b));
            data[offset[hi] + lo - first[hi]] += v;
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (head, tail) = data.split_at_mut(offset[i]);
                let row_j = &head[offset[j]..offset[j + 1]];
                let row_i = &mut tail[..i - fi + 1];
                let s: f64 = row_i[k0 - fi..j - fi].iter().zip(&row_j[k0 - fj..j - fj]).map(|(a, b)| a * b).sum();
                row_i[j - fi] = (row_i[j - fi] - s) / row_j[j - fj];
            }
            let row_i = &mut data[offset[i]..offset[i + 1]];
            let s: f64 = row_i[..i - fi].iter().map(|v| v * v).sum();
            let pivot = row_i[i - fi] - s;
            if !(pivot > 0.0 && pivot.is_finite()) {
                return Err(Error::SingularSystem(format!(
                    "matrix is not positive definite (pivot {pivot:e} at position {i})"
                )));
            }
            row_i[i - fi] = pivot.sqrt();
        }
        Ok(Self {
            n,
            perm,
            first,
            offset,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.solve_into(rhs, &mut out);
        out
    }

    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (old, &new) in self.perm.iter().enumerate() {
            y[new] = rhs[old];
        }
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        for (old, &new) in self.perm.iter().enumerate() {
            out[old] = y[new];
        }
    }
}
