//! Body force on the channel and mass source in the porous block.
//!
//! Channel fields take reference coordinates `(x, z)`, porous fields `(x, y)`
//! with `y` in `(-depth, 0)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GridPair;

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn constant(v: f64) -> ScalarField {
    Arc::new(move |_, _| v)
}

#[derive(Clone)]
pub struct FieldTriple {
    pub f_t: ScalarField,
    pub f_n: ScalarField,
    pub h1: ScalarField,
}

impl FieldTriple {
    pub fn constant(f_t: f64, f_n: f64, h1: f64) -> Self {
        Self {
            f_t: constant(f_t),
            f_n: constant(f_n),
            h1: constant(h1),
        }
    }
}

/// Forcing data, possibly depending on epsilon as `base + eps * slope`.
/// `base` is the limit as epsilon goes to zero.
#[derive(Clone)]
pub struct ForcingSet {
    pub name: String,
    pub base: FieldTriple,
    pub slope: Option<FieldTriple>,
}

impl fmt::Debug for ForcingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForcingSet")
            .field("name", &self.name)
            .field("eps_dependent", &self.slope.is_some())
            .finish()
    }
}

/// Numeric parameters shared by the named presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetParams {
    pub f_t: f64,
    pub f_n: f64,
    pub h1: f64,
    pub g_t: f64,
    pub g_n: f64,
    pub g_h: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            f_t: 1.0,
            f_n: 0.0,
            h1: 0.0,
            g_t: 0.0,
            g_n: 0.0,
            g_h: 0.0,
        }
    }
}

pub const PRESETS: [&str; 3] = ["zero", "constant", "eps-perturbed"];

impl ForcingSet {
    pub fn zero() -> Self {
        Self::custom("zero", FieldTriple::constant(0.0, 0.0, 0.0))
    }

    pub fn custom(name: &str, base: FieldTriple) -> Self {
        Self {
            name: name.to_string(),
            base,
            slope: None,
        }
    }

    pub fn preset(name: &str, p: &PresetParams) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "constant" => Ok(Self::custom(name, FieldTriple::constant(p.f_t, p.f_n, p.h1))),
            "eps-perturbed" => Ok(Self {
                name: name.to_string(),
                base: FieldTriple::constant(p.f_t, p.f_n, p.h1),
                slope: Some(FieldTriple::constant(p.g_t, p.g_n, p.g_h)),
            }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let scale = |f: &FieldTriple| {
            let (a, b, c) = (f.f_t.clone(), f.f_n.clone(), f.h1.clone());
            FieldTriple {
                f_t: Arc::new(move |x, y| s * a(x, y)),
                f_n: Arc::new(move |x, y| s * b(x, y)),
                h1: Arc::new(move |x, y| s * c(x, y)),
            }
        };
        Self {
            name: self.name.clone(),
            base: scale(&self.base),
            slope: self.slope.as_ref().map(scale),
        }
    }

    fn sample(&self, eps: Option<f64>, which: fn(&FieldTriple) -> &ScalarField, x: f64, y: f64) -> f64 {
        let b = which(&self.base)(x, y);
        match (eps, &self.slope) {
            (Some(e), Some(s)) => b + e * which(s)(x, y),
            _ => b,
        }
    }
}

/// Point samples of the forcing on a grid pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteForcing {
    /// Channel vertical faces, index `k * (nx + 1) + i`, walls included.
    pub f_t: Vec<f64>,
    /// Channel horizontal faces, index `k * nx + i`, `k` in `0..=nz`.
    pub f_n: Vec<f64>,
    /// Porous cell centers, index `j * nx + i`.
    pub h1: Vec<f64>,
}

fn sample_grid(fs: &ForcingSet, eps: Option<f64>, g: &GridPair) -> DiscreteForcing {
    let (nx, ny, nz) = (g.nx, g.ny, g.nz);
    let mut f_t = Vec::with_capacity((nx + 1) * nz);
    for k in 0..nz {
        for i in 0..=nx {
            let (x, z) = g.channel.vertical_face(i, k);
            f_t.push(fs.sample(eps, |t| &t.f_t, x, z));
        }
    }
    let mut f_n = Vec::with_capacity(nx * (nz + 1));
    for k in 0..=nz {
        for i in 0..nx {
            let (x, z) = g.channel.horizontal_face(i, k);
            f_n.push(fs.sample(eps, |t| &t.f_n, x, z));
        }
    }
    let mut h1 = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = g.porous.cell_center(i, j);
            h1.push(fs.sample(eps, |t| &t.h1, x, y));
        }
    }
    DiscreteForcing { f_t, f_n, h1 }
}

/// Forcing of the epsilon problem at the given epsilon.
pub fn forcing_at(fs: &ForcingSet, eps: f64, g: &GridPair) -> Result<DiscreteForcing> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(sample_grid(fs, Some(eps), g))
}

/// Forcing in the limit epsilon -> 0.
pub fn limit_forcing(fs: &ForcingSet, g: &GridPair) -> DiscreteForcing {
    sample_grid(fs, None, g)
}

/// Midpoint vertical average of the tangential force at interface node `i`.
pub fn averaged_tangential(d: &DiscreteForcing, g: &GridPair, i: usize) -> f64 {
    (0..g.nz).map(|k| d.f_t[k * (g.nx + 1) + i]).sum::<f64>() * g.dz()
}
