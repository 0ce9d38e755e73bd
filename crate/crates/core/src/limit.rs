//! The reduced problem obtained as the channel thickness goes to zero: porous
//! flow coupled to a one-dimensional Brinkman-type flow on the interface line.
//!
//! Unknowns: porous face velocities, the depth-integrated tangential velocity
//! `V` at interior interface nodes `x_i = i dx` (zero at both ends), porous
//! cell pressures and interface pressure `P` on the `nx` interface cells.

use crate::coefficients::CoefficientSet;
use crate::darcy;
use crate::epsilon::{EpsilonSolution, SaddleSystem};
use crate::error::{Error, Result};
use crate::forcing::{averaged_tangential, limit_forcing, ForcingSet};
use crate::geometry::{DofLayout, GridPair, PorousDofs};
use crate::solver::schur::SolverSettings;
use crate::sparse::{CsrMatrix, SparseSym, SymBuilder};
use std::ops::Range;

#[derive(Clone, Debug)]
pub struct LimitLayout {
    pub nx: usize,
    pub ny: usize,
    pub porous: PorousDofs,
    pub line: Range<usize>,
    pub porous_pressure: Range<usize>,
    pub line_pressure: Range<usize>,
}

impl LimitLayout {
    pub fn new(g: &GridPair) -> Self {
        let porous = PorousDofs { nx: g.nx, ny: g.ny, offset: 0 };
        let np = porous.len();
        Self {
            nx: g.nx,
            ny: g.ny,
            porous,
            line: np..np + g.nx - 1,
            porous_pressure: 0..g.nx * g.ny,
            line_pressure: g.nx * g.ny..g.nx * g.ny + g.nx,
        }
    }

    pub fn n_velocity(&self) -> usize {
        self.line.end
    }

    pub fn n_pressure(&self) -> usize {
        self.line_pressure.end
    }

    /// Interface node `i` in `0..=nx`; the end nodes carry no unknown.
    pub fn node(&self, i: usize) -> Option<usize> {
        if i == 0 || i >= self.nx {
            None
        } else {
            Some(self.line.start + i - 1)
        }
    }
}

#[derive(Clone, Debug)]
pub struct LimitSystem {
    pub grid: GridPair,
    pub layout: LimitLayout,
    pub coefficients: CoefficientSet,
    pub saddle: SaddleSystem,
}

/// Line block: `beta s11 dx` lumped mass plus `mu / dx` three-point stiffness.
fn line_operator(g: &GridPair, l: &LimitLayout, mass_w: f64, stiff_w: f64) -> SparseSym {
    let dx = g.dx();
    let mut b = SymBuilder::new(l.n_velocity());
    for i in 1..g.nx {
        b.add_diag(l.node(i).expect("interior node"), mass_w * dx);
    }
    for i in 0..g.nx {
        b.add_difference(l.node(i), l.node(i + 1), stiff_w / dx);
    }
    b.build()
}

pub fn assemble_limit(c: &CoefficientSet, fs: &ForcingSet, g: &GridPair) -> Result<LimitSystem> {
    c.validate()?;
    let l = LimitLayout::new(g);
    let n = l.n_velocity();
    let mass = darcy::assemble_darcy_mass(c, g, &l.porous, n)?;
    let robin = darcy::assemble_interface_robin(c.mu + c.alpha, g, &l.porous, n)?;
    let line = line_operator(g, &l, c.beta * c.slip_factor()?, c.mu);
    let a = SparseSym::sum(&[&mass, &robin, &line])?;

    let dx = g.dx();
    let d1 = darcy::assemble_divergence(g, &l.porous, n);
    let mut t = Vec::with_capacity(3 * g.nx);
    for i in 0..g.nx {
        t.push((i, l.porous.interface(i), -dx));
        if let Some(d) = l.node(i + 1) {
            t.push((i, d, 1.0));
        }
        if let Some(d) = l.node(i) {
            t.push((i, d, -1.0));
        }
    }
    let b = d1.vstack(&CsrMatrix::from_triplets(g.nx, n, t))?;

    let forcing = limit_forcing(fs, g);
    let mut f = vec![0.0; n];
    for i in 1..g.nx {
        f[l.node(i).expect("interior node")] = dx * averaged_tangential(&forcing, g, i);
    }
    let area = g.porous.cell_area();
    let mut h = vec![0.0; l.n_pressure()];
    for (hc, src) in h.iter_mut().zip(&forcing.h1) {
        *hc = src * area;
    }
    Ok(LimitSystem {
        grid: g.clone(),
        layout: l,
        coefficients: *c,
        saddle: SaddleSystem { a, b, f, h },
    })
}

#[derive(Clone, Debug)]
pub struct LimitSolution {
    pub grid: GridPair,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub u1: Vec<f64>,
    pub v1: Vec<f64>,
    /// Interface flux `g`, one value per interface cell.
    pub flux: Vec<f64>,
    /// `V` at nodes `0..=nx`, zero at the ends.
    pub line_velocity: Vec<f64>,
    pub p1: Vec<f64>,
    /// `P`, one value per interface cell.
    pub line_pressure: Vec<f64>,
    /// Normal channel velocity `(1 - z) g` on horizontal channel faces `k * nx + i`.
    pub xi: Vec<f64>,
    pub outer_iterations: usize,
    pub kkt_residual: f64,
}

pub fn reconstruct_xi(g: &GridPair, flux: &[f64]) -> Vec<f64> {
    let mut xi = Vec::with_capacity(g.nx * (g.nz + 1));
    for k in 0..=g.nz {
        let z = k as f64 * g.dz();
        xi.extend(flux.iter().map(|gi| (1.0 - z) * gi));
    }
    xi
}

impl LimitSolution {
    pub fn from_vectors(g: &GridPair, l: &LimitLayout, velocity: Vec<f64>, pressure: Vec<f64>) -> Self {
        let d = &l.porous;
        let u1 = d.vertical_range().map(|x| velocity[x]).collect();
        let v1: Vec<f64> = d.horizontal_range().map(|x| velocity[x]).collect();
        let flux = v1[g.ny * g.nx..].to_vec();
        let line_velocity = (0..=g.nx).map(|i| l.node(i).map_or(0.0, |x| velocity[x])).collect();
        Self {
            grid: g.clone(),
            u1,
            v1,
            xi: reconstruct_xi(g, &flux),
            flux,
            line_velocity,
            p1: pressure[l.porous_pressure.clone()].to_vec(),
            line_pressure: pressure[l.line_pressure.clone()].to_vec(),
            velocity,
            pressure,
            outer_iterations: 0,
            kkt_residual: 0.0,
        }
    }

    /// Lift to the channel fields of the thin problem at thickness `eps`:
    /// `v_T = V / eps` independent of depth, `v_N = xi`, channel pressure `P`
    /// independent of depth.
    pub fn lift(&self, eps: f64, layout: &DofLayout) -> Result<EpsilonSolution> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidEpsilon(eps));
        }
        let g = &self.grid;
        let mut v = vec![0.0; layout.n_velocity()];
        let mut p = vec![0.0; layout.n_pressure()];
        let d = &layout.porous;
        for (x, val) in d.vertical_range().zip(&self.u1) {
            v[x] = *val;
        }
        for (x, val) in d.horizontal_range().zip(&self.v1) {
            v[x] = *val;
        }
        for k in 0..g.nz {
            for i in 0..=g.nx {
                if let Some(x) = layout.channel_tangential_dof(i, k) {
                    v[x] = self.line_velocity[i] / eps;
                }
            }
        }
        for k in 1..g.nz {
            for i in 0..g.nx {
                if let Some(x) = layout.channel_normal_dof(i, k) {
                    v[x] = self.xi[k * g.nx + i];
                }
            }
        }
        p[layout.porous_pressure.clone()].copy_from_slice(&self.p1);
        for k in 0..g.nz {
            for i in 0..g.nx {
                p[layout.channel_cell(i, k)] = self.line_pressure[i];
            }
        }
        Ok(EpsilonSolution::from_vectors(eps, g, layout, v, p))
    }
}

pub fn solve_limit(sys: &LimitSystem, settings: &SolverSettings) -> Result<LimitSolution> {
    let s = sys.saddle.solve(settings, None)?;
    let mut sol = LimitSolution::from_vectors(&sys.grid, &sys.layout, s.velocity, s.pressure);
    sol.outer_iterations = s.outer_iterations;
    sol.kkt_residual = s.kkt_residual;
    Ok(sol)
}

/// `max_i |p1(top cell i) - P_i - (mu + alpha) g_i|`. The porous pressure is a
/// cell value half a cell below the interface, so this decays like `dy`.
pub fn pressure_identity_residual(sol: &LimitSolution, c: &CoefficientSet) -> f64 {
    let g = &sol.grid;
    (0..g.nx)
        .map(|i| {
            let top = sol.p1[(g.ny - 1) * g.nx + i];
            (top - sol.line_pressure[i] - (c.mu + c.alpha) * sol.flux[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Velocity Gram matrix: `H(div)` on the porous block, `L^2` of the interface
/// trace, `H^1` of the line velocity.
pub fn velocity_gram(g: &GridPair, l: &LimitLayout) -> SparseSym {
    let n = l.n_velocity();
    let hdiv = darcy::hdiv_gram(g, &l.porous, n);
    let trace = darcy::assemble_interface_robin(1.0, g, &l.porous, n).expect("unit weight");
    let line = line_operator(g, l, 1.0, 1.0);
    SparseSym::sum(&[&hdiv, &trace, &line]).expect("same dimension")
}

pub fn pressure_mass(g: &GridPair, l: &LimitLayout) -> Vec<f64> {
    let mut m = vec![g.porous.cell_area(); l.n_pressure()];
    for w in &mut m[l.line_pressure.clone()] {
        *w = g.dx();
    }
    m
}
