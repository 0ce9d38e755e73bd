//! Physical coefficients of a run.

use crate::error::{Error, Result};

/// 2x2 tensor stored row-major. Symmetry is checked, not assumed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl Tensor2 {
    pub const IDENTITY: Tensor2 = Tensor2::diag(1.0, 1.0);

    pub const fn new(xx: f64, xy: f64, yx: f64, yy: f64) -> Self {
        Self { xx, xy, yx, yy }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn sym(a: f64, b: f64, d: f64) -> Self {
        Self::new(a, b, b, d)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.xx, self.xy, self.yx, self.yy]
    }

    pub fn mul(&self, o: &Tensor2) -> Tensor2 {
        Tensor2::new(
            self.xx * o.xx + self.xy * o.yx,
            self.xx * o.xy + self.xy * o.yy,
            self.yx * o.xx + self.yy * o.yx,
            self.yx * o.xy + self.yy * o.yy,
        )
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.yx * v[0] + self.yy * v[1]]
    }

    pub fn max_abs_diff(&self, o: &Tensor2) -> f64 {
        self.to_array()
            .iter()
            .zip(o.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> (f64, f64) {
        let b = 0.5 * (self.xy + self.yx);
        let m = 0.5 * (self.xx + self.yy);
        let r = (0.5 * (self.xx - self.yy)).hypot(b);
        (m - r, m + r)
    }

    pub fn inverse(&self) -> Tensor2 {
        let det = self.xx * self.yy - self.xy * self.yx;
        Tensor2::new(self.yy / det, -self.xy / det, -self.yx / det, self.xx / det)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientSet {
    /// Resistance tensor (viscosity over permeability).
    pub q: Tensor2,
    pub mu: f64,
    /// Entry resistance across the interface.
    pub alpha: f64,
    /// Slip coefficient.
    pub beta: f64,
}

impl Default for CoefficientSet {
    fn default() -> Self {
        Self {
            q: Tensor2::IDENTITY,
            mu: 1.0,
            alpha: 0.0,
            beta: 1.0,
        }
    }
}

const SYMMETRY_TOL: f64 = 1e-12;

impl CoefficientSet {
    /// Returns the ellipticity constant of `Q` (its smallest eigenvalue).
    pub fn validate(&self) -> Result<f64> {
        let q = &self.q;
        if !q.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCoefficient("Q has non-finite entries".into()));
        }
        let mismatch = (q.xy - q.yx).abs();
        if mismatch > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { mismatch });
        }
        let (lo, _) = q.sym_eigenvalues();
        if lo <= 0.0 {
            return Err(Error::NotElliptic { min_eigenvalue: lo });
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidCoefficient(format!("mu must be positive, got {}", self.mu)));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidCoefficient(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(lo)
    }

    /// Symmetric positive square root of `Q`.
    pub fn sqrt_q(&self) -> Result<Tensor2> {
        self.validate()?;
        let q = &self.q;
        let b = 0.5 * (q.xy + q.yx);
        // For SPD 2x2: sqrt(Q) = (Q + sqrt(det) I) / sqrt(tr + 2 sqrt(det)).
        let s = (q.xx * q.yy - b * b).sqrt();
        let t = (q.xx + q.yy + 2.0 * s).sqrt();
        Ok(Tensor2::new((q.xx + s) / t, b / t, b / t, (q.yy + s) / t))
    }

    /// Tangential-tangential entry of `sqrt(Q)`, used by the slip term.
    pub fn slip_factor(&self) -> Result<f64> {
        Ok(self.sqrt_q()?.xx)
    }
}
