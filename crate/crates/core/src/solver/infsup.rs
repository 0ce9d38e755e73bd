//! Numerical inf-sup constant: the smallest generalized singular value of a
//! constraint matrix `B` measured in a velocity Gram norm `G` and a diagonal
//! pressure mass `M`, i.e. `sqrt(lambda_min)` of `B G^{-1} B' q = lambda M q`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::cg::{conjugate_gradient, CgOptions};
use super::cholesky::SkylineCholesky;
use super::schur::{InnerSolver, SchurOperator};
use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix, SparseSym};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InfSupOptions {
    pub max_iterations: usize,
    /// Stop once the eigen-residual `|z - mu y| / mu` of the inverse iteration
    /// falls below this; the eigenvalue error is roughly its square.
    pub residual_tol: f64,
    pub solve_tol: f64,
}

impl Default for InfSupOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            residual_tol: 1e-7,
            solve_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfSupEstimate {
    pub constant: f64,
    pub lambda_min: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
}

/// Inverse power iteration (shift zero) on `M^{-1/2} S M^{-1/2}`.
pub fn estimate_inf_sup(
    b: &CsrMatrix,
    gram: &SparseSym,
    pressure_mass: &[f64],
    opts: &InfSupOptions,
) -> Result<InfSupEstimate> {
    let m = b.nrows;
    if b.ncols != gram.dim() || pressure_mass.len() != m {
        return Err(Error::DimensionMismatch("inf-sup operands".into()));
    }
    if pressure_mass.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::DimensionMismatch("pressure mass must be positive".into()));
    }
    if m == 0 {
        return Ok(InfSupEstimate {
            constant: 0.0,
            lambda_min: 0.0,
            iterations: 0,
            inner_iterations: 0,
        });
    }
    let inner = InnerSolver::Cholesky(SkylineCholesky::factor(gram)?);
    let schur = SchurOperator { inner: &inner, b };
    let sqrt_m: Vec<f64> = pressure_mass.iter().map(|w| w.sqrt()).collect();
    let cg = CgOptions::new(opts.solve_tol, 20 * m.max(10));

    // Deterministic start vector with no special symmetry.
    let mut y: Vec<f64> = (0..m).map(|i| 1.0 + 0.5 * ((i as f64) * 1.618_033_988_7).sin()).collect();
    let n0 = norm2(&y);
    y.iter_mut().for_each(|v| *v /= n0);
    let mut lambda = f64::INFINITY;
    let mut guess: Option<Vec<f64>> = None;
    let mut inner_iterations = 0;
    for it in 1..=opts.max_iterations {
        let rhs: Vec<f64> = y.iter().zip(&sqrt_m).map(|(a, s)| a * s).collect();
        let out = conjugate_gradient(&schur, &rhs, guess.as_deref(), &cg)?;
        inner_iterations += out.iterations;
        let z: Vec<f64> = out.x.iter().zip(&sqrt_m).map(|(a, s)| a * s).collect();
        // Rayleigh quotient of the inverse operator at y.
        let mu = dot(&y, &z);
        let resid = z.iter().zip(&y).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt() / mu;
        let zn = norm2(&z);
        let converged = resid <= opts.residual_tol;
        lambda = 1.0 / mu;
        // Warm start: the next solve's answer is roughly x / (|z| lambda).
        guess = Some(out.x.iter().map(|v| v / (zn * lambda)).collect());
        y = z.iter().map(|v| v / zn).collect();
        if converged {
            // Final estimate: Rayleigh quotient of the operator itself.
            let q: Vec<f64> = y.iter().zip(&sqrt_m).map(|(a, s)| a / s).collect();
            let mut sq = vec![0.0; m];
            crate::solver::cg::LinearOperator::apply(&schur, &q, &mut sq)?;
            let rq = dot(&q, &sq) / dot(&y, &y);
            return Ok(InfSupEstimate {
                constant: rq.max(0.0).sqrt(),
                lambda_min: rq,
                iterations: it,
                inner_iterations,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "inverse power iteration",
        iterations: opts.max_iterations,
        residual: lambda,
    })
}

/// Dense reference: forms `M^{-1/2} B G^{-1} B' M^{-1/2}` and takes its
/// smallest eigenvalue. Only for small problems.
pub fn dense_inf_sup(b: &CsrMatrix, gram: &SparseSym, pressure_mass: &[f64]) -> f64 {
    let (m, n) = (b.nrows, b.ncols);
    let g = DMatrix::from_fn(n, n, |i, j| gram.get(i, j));
    let bd = DMatrix::from_fn(m, n, |i, j| b.get(i, j));
    let chol = g.cholesky().expect("gram matrix must be SPD");
    let ginv_bt = chol.solve(&bd.transpose());
    let s = &bd * ginv_bt;
    let t = DMatrix::from_fn(m, m, |i, j| {
        let v = s[(i, j)] / (pressure_mass[i] * pressure_mass[j]).sqrt();
        0.5 * (v + s[(j, i)] / (pressure_mass[i] * pressure_mass[j]).sqrt())
    });
    let eig = SymmetricEigen::new(t);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}
