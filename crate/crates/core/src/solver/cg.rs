use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseSym};

/// Symmetric linear operator applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for SparseSym {
    fn dim(&self) -> usize {
        SparseSym::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec_into(x, y);
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    pub tol: f64,
    pub cap: usize,
    /// Record `0.5 x'Ax - b'x` after every iteration.
    pub record_energy: bool,
    /// Flag curvature `d'Ad <= breakdown * |d|^2 * (largest curvature seen)`
    /// as a singular operator.
    pub breakdown: f64,
}

impl CgOptions {
    pub fn new(tol: f64, cap: usize) -> Self {
        Self {
            tol,
            cap,
            record_energy: false,
            breakdown: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub energy: Vec<f64>,
}

fn energy(x: &[f64], r: &[f64], b: &[f64]) -> f64 {
    // With r = b - Ax: 0.5 x'Ax - b'x = -0.5 (x'r + b'x).
    -0.5 * (dot(x, r) + dot(b, x))
}

pub fn conjugate_gradient<Op: LinearOperator + ?Sized>(
    op: &Op,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &CgOptions,
) -> Result<CgOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("rhs has {} entries, operator {n}", b.len())));
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("cg right-hand side"));
    }
    let bnorm = norm2(b);
    let mut log = Vec::new();
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            energy: log,
        });
    }
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut ax = vec![0.0; n];
    op.apply(&x, &mut ax)?;
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let mut ad = vec![0.0; n];
    let mut max_curv: f64 = 0.0;
    if opts.record_energy {
        log.push(energy(&x, &r, b));
    }
    let mut it = 0;
    while rr.sqrt() > opts.tol * bnorm {
        if it >= opts.cap {
            return Err(Error::NonConvergence {
                solver: "conjugate gradient",
                iterations: it,
                residual: rr.sqrt() / bnorm,
            });
        }
        op.apply(&d, &mut ad)?;
        let dd = dot(&d, &d);
        let dad = dot(&d, &ad);
        if !dad.is_finite() {
            return Err(Error::NonFinite("conjugate gradient"));
        }
        max_curv = max_curv.max(dad / dd);
        if dad <= opts.breakdown * dd * max_curv {
            return Err(Error::SingularSystem(format!(
                "curvature {:e} along a search direction after {it} iterations",
                dad / dd
            )));
        }
        let alpha = rr / dad;
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
        rr = rr_new;
        it += 1;
        if opts.record_energy {
            log.push(energy(&x, &r, b));
        }
    }
    Ok(CgOutcome {
        x,
        iterations: it,
        relative_residual: rr.sqrt() / bnorm,
        energy: log,
    })
}

/// Plain CG on a sparse SPD matrix; stops at relative residual `tol`.
pub fn cg_solve(m: &SparseSym, rhs: &[f64], tol: f64, cap: usize) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("cg matrix"));
    }
    Ok(conjugate_gradient(m, rhs, None, &CgOptions::new(tol, cap))?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SymBuilder;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = [1.0, -2.0, 3.5];
        assert_eq!(cg_solve(&SparseSym::identity(3), &b, 1e-12, 10).unwrap(), b);
    }

    #[test]
    fn diagonal_system() {
        let m = SparseSym::diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let x = cg_solve(&m, &[1.0; 5], 1e-14, 50).unwrap();
        for (i, v) in x.iter().enumerate() {
            assert!((v - 1.0 / (i + 1) as f64).abs() < 1e-14);
        }
    }

    fn random_spd(n: usize, seed: u64) -> (SparseSym, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = g.transpose() * &g + DMatrix::identity(n, n);
        let mut b = SymBuilder::new(n);
        for i in 0..n {
            b.add_diag(i, a[(i, i)]);
            for j in i + 1..n {
                b.add_pair(i, j, a[(i, j)]);
            }
        }
        (b.build(), a)
    }

    #[test]
    fn random_spd_matches_dense_solve() {
        let (m, dense) = random_spd(20, 7);
        let rhs: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = cg_solve(&m, &rhs, 1e-13, 200).unwrap();
        let oracle = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..20 {
            assert!((x[i] - oracle[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_decreases_monotonically() {
        let (m, _) = random_spd(30, 11);
        let rhs = vec![1.0; 30];
        let mut opts = CgOptions::new(1e-12, 300);
        opts.record_energy = true;
        let out = conjugate_gradient(&m, &rhs, None, &opts).unwrap();
        assert!(out.energy.len() > 2);
        for w in out.energy.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }

    #[test]
    fn cap_reports_nonconvergence() {
        let (m, _) = random_spd(30, 3);
        let err = cg_solve(&m, &[1.0; 30], 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 2, .. }));
    }

    #[test]
    fn indefinite_detected() {
        let m = SparseSym::diagonal(&[1.0, -1.0]);
        assert!(matches!(cg_solve(&m, &[1.0, 1.0], 1e-12, 10), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn non_finite_rhs() {
        let m = SparseSym::identity(2);
        assert!(matches!(cg_solve(&m, &[f64::NAN, 1.0], 1e-12, 10), Err(Error::NonFinite(_))));
    }
}
