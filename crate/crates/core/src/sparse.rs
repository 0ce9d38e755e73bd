//! Sparse storage: a general CSR matrix and a symmetric matrix stored once per
//! unordered index pair.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, duplicate-free columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Sums duplicates in insertion order, so the result is deterministic.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "entry ({r},{c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yr = s;
        }
    }

    /// `B^T y` using the stored values of `B` directly.
    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ncols];
        self.transpose_matvec_into(y, &mut x);
        x
    }

    pub fn transpose_matvec_into(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.nrows);
        assert_eq!(x.len(), self.ncols);
        x.iter_mut().for_each(|v| *v = 0.0);
        for (r, &yr) in y.iter().enumerate() {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                x[self.col_idx[p]] += self.values[p] * yr;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                entries.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, entries)
    }

    /// Stacks `self` above `other`; both must have the same column count.
    pub fn vstack(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} and {} columns",
                self.ncols, other.ncols
            )));
        }
        let mut row_ptr = self.row_ptr.clone();
        let base = self.nnz();
        row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + base));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&other.col_idx);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(CsrMatrix {
            nrows: self.nrows + other.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}

/// Accumulates symmetric contributions; off-diagonal pairs are stored once.
#[derive(Clone, Debug, Default)]
pub struct SymBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.entries.push((i, i, v));
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `i != j`.
    pub fn add_pair(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_ne!(i, j);
        self.entries.push((i.min(j), i.max(j), v));
    }

    /// Adds the quadratic form `c (x_i - x_j)^2`; a `None` end is a zero value.
    pub fn add_difference(&mut self, i: Option<usize>, j: Option<usize>, c: f64) {
        match (i, j) {
            (Some(a), Some(b)) => {
                self.add_diag(a, c);
                self.add_diag(b, c);
                self.add_pair(a, b, -c);
            }
            (Some(a), None) | (None, Some(a)) => self.add_diag(a, c),
            (None, None) => {}
        }
    }

    /// Adds `w (sum_k c_k x_{i_k})^2`.
    pub fn add_outer(&mut self, terms: &[(usize, f64)], w: f64) {
        for (a, &(i, ci)) in terms.iter().enumerate() {
            self.add_diag(i, w * ci * ci);
            for &(j, cj) in &terms[a + 1..] {
                if i == j {
                    self.add_diag(i, 2.0 * w * ci * cj);
                } else {
                    self.add_pair(i, j, w * ci * cj);
                }
            }
        }
    }

    pub fn build(self) -> SparseSym {
        SparseSym::from_upper(self.n, self.entries)
    }
}

/// Symmetric sparse matrix. `upper` holds each unordered pair once
/// (`row <= col`); `full` mirrors it for fast products.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    n: usize,
    upper: Vec<(usize, usize, f64)>,
    full: CsrMatrix,
}

impl SparseSym {
    pub fn zeros(n: usize) -> Self {
        Self::from_upper(n, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_upper(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_upper(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    fn from_upper(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r <= c && c < n, "symmetric entry ({r},{c}) invalid for n = {n}");
            match upper.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => upper.push((r, c, v)),
            }
        }
        let mut mirrored = Vec::with_capacity(2 * upper.len());
        for &(r, c, v) in &upper {
            mirrored.push((r, c, v));
            if r != c {
                mirrored.push((c, r, v));
            }
        }
        let full = CsrMatrix::from_triplets(n, n, mirrored);
        Self { n, upper, full }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.upper
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.full
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.full.get(i, j)
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.full.matvec(x)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        self.full.matvec_into(x, y)
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }

    pub fn scaled(&self, s: f64) -> SparseSym {
        Self::from_upper(self.n, self.upper.iter().map(|&(r, c, v)| (r, c, s * v)).collect())
    }

    /// Entrywise sum of equally sized matrices.
    pub fn sum(parts: &[&SparseSym]) -> Result<SparseSym> {
        let n = parts.first().map_or(0, |p| p.n);
        if parts.iter().any(|p| p.n != n) {
            return Err(Error::DimensionMismatch("summing symmetric matrices of different size".into()));
        }
        let entries = parts.iter().flat_map(|p| p.upper.iter().copied()).collect();
        Ok(Self::from_upper(n, entries))
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> SparseSym {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let entries = self
            .upper
            .iter()
            .filter(|e| map[e.0] != usize::MAX && map[e.1] != usize::MAX)
            .map(|&(r, c, v)| {
                let (a, b) = (map[r], map[c]);
                (a.min(b), a.max(b), v)
            })
            .collect();
        Self::from_upper(keep.len(), entries)
    }

    /// Symmetric permutation: new index `perm[old]`.
    pub fn permute(&self, perm: &[usize]) -> SparseSym {
        let entries = self
            .upper
            .iter()
            .map(|&(r, c, v)| {
                let (a, b) = (perm[r], perm[c]);
                (a.min(b), a.max(b), v)
            })
            .collect();
        Self::from_upper(self.n, entries)
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|e| e.2.is_finite())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.full.to_dense()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
