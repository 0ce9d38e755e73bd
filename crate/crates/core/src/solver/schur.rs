//! Schur-complement conjugate gradients for `[A B'; B 0] [v; p] = [f; h]`.

use super::cg::{conjugate_gradient, CgOptions, LinearOperator};
use super::cholesky::SkylineCholesky;
use crate::error::{Error, Result};
use crate::sparse::{norm2, CsrMatrix, SparseSym};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerMethod {
    /// Sparse Cholesky factorization of the velocity block, computed once.
    Cholesky,
    /// Conjugate gradients on the velocity block for every application.
    Cg,
}

impl InnerMethod {
    pub fn name(&self) -> &'static str {
        match self {
            InnerMethod::Cholesky => "cholesky",
            InnerMethod::Cg => "cg",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub outer_tol: f64,
    pub inner_tol: f64,
    /// Outer iteration cap is this factor times the pressure count.
    pub outer_cap_factor: usize,
    /// Inner CG cap is this factor times the velocity count.
    pub inner_cap_factor: usize,
    pub inner: InnerMethod,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            outer_tol: 1e-12,
            inner_tol: 1e-13,
            outer_cap_factor: 5,
            inner_cap_factor: 10,
            inner: InnerMethod::Cholesky,
        }
    }
}

/// Solves with the velocity block; either a factorization or inner CG.
pub enum InnerSolver<'a> {
    Cholesky(SkylineCholesky),
    Cg { matrix: &'a SparseSym, tol: f64, cap: usize },
}

impl<'a> InnerSolver<'a> {
    pub fn new(a: &'a SparseSym, settings: &SolverSettings) -> Result<Self> {
        Ok(match settings.inner {
            InnerMethod::Cholesky => InnerSolver::Cholesky(SkylineCholesky::factor(a)?),
            InnerMethod::Cg => InnerSolver::Cg {
                matrix: a,
                tol: settings.inner_tol,
                cap: settings.inner_cap_factor * a.dim().max(1),
            },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            InnerSolver::Cholesky(c) => c.dim(),
            InnerSolver::Cg { matrix, .. } => matrix.dim(),
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            InnerSolver::Cholesky(c) => Ok(c.solve(rhs)),
            InnerSolver::Cg { matrix, tol, cap } => {
                Ok(conjugate_gradient(*matrix, rhs, None, &CgOptions::new(*tol, *cap))?.x)
            }
        }
    }
}

/// `p -> B A^{-1} B' p`.
pub struct SchurOperator<'s, 'a> {
    pub inner: &'s InnerSolver<'a>,
    pub b: &'s CsrMatrix,
}

impl LinearOperator for SchurOperator<'_, '_> {
    fn dim(&self) -> usize {
        self.b.nrows
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let w = self.inner.solve(&self.b.transpose_matvec(x))?;
        self.b.matvec_into(&w, y);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SchurOutcome {
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub outer_iterations: usize,
    pub refinements: usize,
    /// `(|f - Av - B'p| + |h - Bv|) / (1 + |f| + |h|)`.
    pub kkt_residual: f64,
}

pub fn kkt_residual(a: &SparseSym, b: &CsrMatrix, f: &[f64], h: &[f64], v: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let av = a.matvec(v);
    let btp = b.transpose_matvec(p);
    let r1 = (0..f.len()).map(|i| f[i] - av[i] - btp[i]).collect();
    let bv = b.matvec(v);
    let r2 = (0..h.len()).map(|i| h[i] - bv[i]).collect();
    (r1, r2)
}

fn relative(r1: &[f64], r2: &[f64], scale: f64) -> f64 {
    (norm2(r1) + norm2(r2)) / scale
}

const REFINE_TARGET: f64 = 1e-14;
const MAX_REFINEMENTS: usize = 2;

struct Core<'s, 'a> {
    inner: &'s InnerSolver<'a>,
    b: &'s CsrMatrix,
    opts: CgOptions,
}

impl Core<'_, '_> {
    fn run(&self, f: &[f64], h: &[f64], p0: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>, usize)> {
        let g = self.inner.solve(f)?;
        let mut rhs = self.b.matvec(&g);
        for (r, hi) in rhs.iter_mut().zip(h) {
            *r -= hi;
        }
        let op = SchurOperator { inner: self.inner, b: self.b };
        let out = conjugate_gradient(&op, &rhs, p0, &self.opts).map_err(|e| match e {
            Error::NonConvergence { iterations, residual, .. } => Error::NonConvergence {
                solver: "schur complement cg",
                iterations,
                residual,
            },
            other => other,
        })?;
        let btp = self.b.transpose_matvec(&out.x);
        let rhs_v: Vec<f64> = f.iter().zip(&btp).map(|(a, b)| a - b).collect();
        Ok((self.inner.solve(&rhs_v)?, out.x, out.iterations))
    }
}

/// Solves the KKT system `A v + B' p = f`, `B v = h`.
pub fn schur_solve(
    a: &SparseSym,
    b: &CsrMatrix,
    f: &[f64],
    h: &[f64],
    settings: &SolverSettings,
) -> Result<SchurOutcome> {
    schur_solve_from(a, b, f, h, settings, None)
}

/// As [`schur_solve`], starting the outer iteration from `p0`.
pub fn schur_solve_from(
    a: &SparseSym,
    b: &CsrMatrix,
    f: &[f64],
    h: &[f64],
    settings: &SolverSettings,
    p0: Option<&[f64]>,
) -> Result<SchurOutcome> {
    let inner = InnerSolver::new(a, settings)?;
    schur_solve_with(&inner, a, b, f, h, settings, p0)
}

pub fn schur_solve_with(
    inner: &InnerSolver<'_>,
    a: &SparseSym,
    b: &CsrMatrix,
    f: &[f64],
    h: &[f64],
    settings: &SolverSettings,
    p0: Option<&[f64]>,
) -> Result<SchurOutcome> {
    let (n, m) = (a.dim(), b.nrows);
    if b.ncols != n || f.len() != n || h.len() != m || p0.is_some_and(|p| p.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "A is {n}x{n}, B is {}x{}, f has {}, h has {}",
            b.nrows,
            b.ncols,
            f.len(),
            h.len()
        )));
    }
    if !f.iter().chain(h).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("saddle right-hand side"));
    }
    if let Some(r) = (0..m).find(|&r| b.row(r).all(|(_, v)| v == 0.0)) {
        return Err(Error::SingularSystem(format!("constraint row {r} is empty")));
    }
    let core = Core {
        inner,
        b,
        opts: CgOptions::new(settings.outer_tol, settings.outer_cap_factor * m.max(1)),
    };
    let (mut v, mut p, iterations) = core.run(f, h, p0)?;
    let scale = 1.0 + norm2(f) + norm2(h);
    let (mut r1, mut r2) = kkt_residual(a, b, f, h, &v, &p);
    let mut res = relative(&r1, &r2, scale);
    let mut refinements = 0;
    while res > REFINE_TARGET && refinements < MAX_REFINEMENTS {
        let (dv, dp, _) = core.run(&r1, &r2, None)?;
        let v2: Vec<f64> = v.iter().zip(&dv).map(|(x, d)| x + d).collect();
        let p2: Vec<f64> = p.iter().zip(&dp).map(|(x, d)| x + d).collect();
        let (s1, s2) = kkt_residual(a, b, f, h, &v2, &p2);
        let res2 = relative(&s1, &s2, scale);
        refinements += 1;
        if res2 >= res {
            break;
        }
        (v, p, r1, r2, res) = (v2, p2, s1, s2, res2);
    }
    Ok(SchurOutcome {
        v,
        p,
        outer_iterations: iterations,
        refinements,
        kkt_residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::cg::cg_solve;
    use crate::sparse::SymBuilder;

    #[test]
    fn unconstrained_reduces_to_cg() {
        let a = SparseSym::diagonal(&[2.0, 4.0, 8.0]);
        let b = CsrMatrix::zeros(0, 3);
        let f = [1.0, 1.0, 1.0];
        let out = schur_solve(&a, &b, &f, &[], &SolverSettings::default()).unwrap();
        let cg = cg_solve(&a, &f, 1e-14, 30).unwrap();
        for i in 0..3 {
            assert!((out.v[i] - cg[i]).abs() < 1e-15);
        }
        assert!(out.p.is_empty());
    }

    #[test]
    fn hand_system() {
        let a = SparseSym::identity(2);
        let b = CsrMatrix::from_triplets(1, 2, vec![(0, 0, 1.0)]);
        for inner in [InnerMethod::Cholesky, InnerMethod::Cg] {
            let s = SolverSettings { inner, ..Default::default() };
            let out = schur_solve(&a, &b, &[1.0, 1.0], &[0.0], &s).unwrap();
            assert!(out.v[0].abs() < 1e-14 && (out.v[1] - 1.0).abs() < 1e-14);
            assert!((out.p[0] - 1.0).abs() < 1e-14);
        }
    }

    fn small_system() -> (SparseSym, CsrMatrix, Vec<f64>, Vec<f64>) {
        let mut ab = SymBuilder::new(5);
        for i in 0..5 {
            ab.add_diag(i, 1.0 + i as f64);
        }
        ab.add_difference(Some(0), Some(1), 0.5);
        ab.add_difference(Some(3), Some(4), 0.25);
        let b = CsrMatrix::from_triplets(
            2,
            5,
            vec![(0, 0, 1.0), (0, 1, -1.0), (1, 2, 2.0), (1, 3, 1.0), (1, 4, -0.5)],
        );
        (ab.build(), b, vec![1.0, -0.5, 0.25, 2.0, 0.0], vec![0.3, -0.1])
    }

    #[test]
    fn both_rows_satisfied() {
        let (a, b, f, h) = small_system();
        let out = schur_solve(&a, &b, &f, &h, &SolverSettings::default()).unwrap();
        let (r1, r2) = kkt_residual(&a, &b, &f, &h, &out.v, &out.p);
        assert!(norm2(&r1) < 1e-13 && norm2(&r2) < 1e-13);
        assert!(out.kkt_residual < 1e-13);
    }

    #[test]
    fn permutation_equivariance() {
        let (a, b, f, h) = small_system();
        let perm = [3, 0, 4, 1, 2];
        let ap = a.permute(&perm);
        let bp = CsrMatrix::from_triplets(
            2,
            5,
            (0..2).flat_map(|r| b.row(r).map(move |(c, v)| (r, perm[c], v)).collect::<Vec<_>>()).collect(),
        );
        let mut fp = vec![0.0; 5];
        for i in 0..5 {
            fp[perm[i]] = f[i];
        }
        let s = SolverSettings::default();
        let o1 = schur_solve(&a, &b, &f, &h, &s).unwrap();
        let o2 = schur_solve(&ap, &bp, &fp, &h, &s).unwrap();
        for i in 0..5 {
            assert!((o1.v[i] - o2.v[perm[i]]).abs() < 1e-10);
        }
        for r in 0..2 {
            assert!((o1.p[r] - o2.p[r]).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_row_is_singular() {
        let a = SparseSym::identity(2);
        let b = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0)]);
        let err = schur_solve(&a, &b, &[1.0, 1.0], &[0.0, 0.0], &SolverSettings::default()).unwrap_err();
        assert!(matches!(err, Error::SingularSystem(_)));
    }

    #[test]
    fn dependent_rows_are_singular() {
        let a = SparseSym::identity(3);
        let b = CsrMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 2.0), (1, 1, 2.0)]);
        let err = schur_solve(&a, &b, &[1.0, 0.0, 1.0], &[1.0, 0.0], &SolverSettings::default()).unwrap_err();
        assert!(matches!(err, Error::SingularSystem(_) | Error::NonConvergence { .. }));
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseSym::identity(2);
        let b = CsrMatrix::zeros(1, 3);
        assert!(matches!(
            schur_solve(&a, &b, &[1.0, 1.0], &[0.0], &SolverSettings::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
