//! The coupled problem on the rescaled domain for a fixed channel thickness
//! `eps`: porous flow below, thin-channel viscous flow above, one shared normal
//! velocity on the interface.
//!
//! Physical sign convention: `A v - B' p = f`, `B v = h`.

use crate::channel::{self, FullChannelIndex};
use crate::coefficients::CoefficientSet;
use crate::darcy;
use crate::error::{Error, Result};
use crate::forcing::{forcing_at, DiscreteForcing, ForcingSet};
use crate::geometry::{DofLayout, GridPair};
use crate::norms::NormSuite;
use crate::solver::schur::{kkt_residual, schur_solve_from, SolverSettings};
use crate::sparse::{dot, norm2, CsrMatrix, SparseSym};

/// Sparse saddle system `[A B'; B 0]`.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub a: SparseSym,
    pub b: CsrMatrix,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SaddleSolution {
    pub velocity: Vec<f64>,
    /// Physical pressure (the multiplier of `-B'`).
    pub pressure: Vec<f64>,
    pub outer_iterations: usize,
    pub kkt_residual: f64,
}

impl SaddleSystem {
    pub fn check(&self) -> Result<()> {
        let (n, m) = (self.a.dim(), self.b.nrows);
        if self.b.ncols != n || self.f.len() != n || self.h.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "A {n}x{n}, B {}x{}, f {}, h {}",
                self.b.nrows,
                self.b.ncols,
                self.f.len(),
                self.h.len()
            )));
        }
        Ok(())
    }

    pub fn solve(&self, settings: &SolverSettings, p0: Option<&[f64]>) -> Result<SaddleSolution> {
        self.check()?;
        let neg_p0: Option<Vec<f64>> = p0.map(|p| p.iter().map(|x| -x).collect());
        let out = schur_solve_from(&self.a, &self.b, &self.f, &self.h, settings, neg_p0.as_deref())?;
        Ok(SaddleSolution {
            velocity: out.v,
            pressure: out.p.iter().map(|x| -x).collect(),
            outer_iterations: out.outer_iterations,
            kkt_residual: out.kkt_residual,
        })
    }

    /// `(|A v - B'p - f| + |B v - h|) / (1 + |f| + |h|)` in the physical convention.
    pub fn relative_residual(&self, v: &[f64], p: &[f64]) -> f64 {
        let neg: Vec<f64> = p.iter().map(|x| -x).collect();
        let (r1, r2) = kkt_residual(&self.a, &self.b, &self.f, &self.h, v, &neg);
        (norm2(&r1) + norm2(&r2)) / (1.0 + norm2(&self.f) + norm2(&self.h))
    }
}

/// The seven quadratic forms whose sum is the velocity block.
#[derive(Clone, Debug)]
pub struct EnergyTerms {
    pub darcy_mass: SparseSym,
    pub robin: SparseSym,
    pub tangential_grad: SparseSym,
    pub tangential_dz: SparseSym,
    pub normal_grad: SparseSym,
    pub normal_dz: SparseSym,
    pub slip: SparseSym,
}

impl EnergyTerms {
    pub fn all(&self) -> [&SparseSym; 7] {
        [
            &self.darcy_mass,
            &self.robin,
            &self.tangential_grad,
            &self.tangential_dz,
            &self.normal_grad,
            &self.normal_dz,
            &self.slip,
        ]
    }
}

#[derive(Clone, Debug)]
pub struct EpsilonSystem {
    pub epsilon: f64,
    pub grid: GridPair,
    pub layout: DofLayout,
    pub coefficients: CoefficientSet,
    pub saddle: SaddleSystem,
    pub terms: EnergyTerms,
    pub forcing: DiscreteForcing,
}

pub fn assemble_epsilon(
    c: &CoefficientSet,
    fs: &ForcingSet,
    g: &GridPair,
    layout: &DofLayout,
    eps: f64,
) -> Result<EpsilonSystem> {
    c.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    if layout.nx != g.nx || layout.ny != g.ny || layout.nz != g.nz {
        return Err(Error::DimensionMismatch("layout and grid disagree".into()));
    }
    let n = layout.n_velocity();
    let dofs = &layout.porous;
    let e2 = eps * eps;
    let terms = EnergyTerms {
        darcy_mass: darcy::assemble_darcy_mass(c, g, dofs, n)?,
        robin: darcy::assemble_interface_robin(c.alpha, g, dofs, n)?,
        tangential_grad: channel::tangential_form(g, layout, e2 * c.mu, 0.0),
        tangential_dz: channel::tangential_form(g, layout, 0.0, c.mu),
        normal_grad: channel::normal_form(g, layout, e2 * c.mu, 0.0),
        normal_dz: channel::normal_form(g, layout, 0.0, c.mu),
        slip: channel::assemble_bjs(c, g, layout, eps)?,
    };
    let a = SparseSym::sum(&terms.all())?;
    let d1 = darcy::assemble_divergence(g, dofs, n);
    let d2 = channel::assemble_channel_divergence(g, layout, eps)?;
    let b = d1.vstack(&d2)?;

    let forcing = forcing_at(fs, eps, g)?;
    let (dx, dz) = (g.dx(), g.dz());
    let mut f = vec![0.0; n];
    for k in 0..g.nz {
        for i in 1..g.nx {
            let d = layout.channel_tangential_dof(i, k).expect("interior face");
            f[d] = eps * forcing.f_t[k * (g.nx + 1) + i] * dx * dz;
        }
    }
    for k in 0..g.nz {
        for i in 0..g.nx {
            let d = layout.channel_normal_dof(i, k).expect("retained face");
            f[d] += eps * forcing.f_n[k * g.nx + i] * dx * g.normal_row_weight(k);
        }
    }
    let mut h = vec![0.0; layout.n_pressure()];
    let area = g.porous.cell_area();
    for (hc, src) in h.iter_mut().zip(&forcing.h1) {
        *hc = src * area;
    }
    Ok(EpsilonSystem {
        epsilon: eps,
        grid: g.clone(),
        layout: layout.clone(),
        coefficients: *c,
        saddle: SaddleSystem { a, b, f, h },
        terms,
        forcing,
    })
}

#[derive(Clone, Debug)]
pub struct EpsilonSolution {
    pub epsilon: f64,
    pub grid: GridPair,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Porous vertical faces `j * (nx + 1) + i`.
    pub u1: Vec<f64>,
    /// Porous horizontal faces `j * nx + i`, `j` in `0..=ny`.
    pub v1: Vec<f64>,
    /// Channel vertical faces `k * (nx + 1) + i`; wall columns are zero.
    pub vt: Vec<f64>,
    /// Channel horizontal faces `k * nx + i`; row 0 is the interface, row `nz` zero.
    pub vn: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub outer_iterations: usize,
    pub kkt_residual: f64,
}

impl EpsilonSolution {
    pub fn from_vectors(eps: f64, g: &GridPair, layout: &DofLayout, velocity: Vec<f64>, pressure: Vec<f64>) -> Self {
        let (nx, ny, nz) = (g.nx, g.ny, g.nz);
        let d = &layout.porous;
        let mut u1 = Vec::with_capacity((nx + 1) * ny);
        for j in 0..ny {
            for i in 0..=nx {
                u1.push(velocity[d.u(i, j)]);
            }
        }
        let mut v1 = Vec::with_capacity(nx * (ny + 1));
        for j in 0..=ny {
            for i in 0..nx {
                v1.push(velocity[d.v(i, j)]);
            }
        }
        let mut vt = Vec::with_capacity((nx + 1) * nz);
        for k in 0..nz {
            for i in 0..=nx {
                vt.push(layout.channel_tangential_dof(i, k).map_or(0.0, |x| velocity[x]));
            }
        }
        let mut vn = Vec::with_capacity(nx * (nz + 1));
        for k in 0..=nz {
            for i in 0..nx {
                vn.push(layout.channel_normal_dof(i, k).map_or(0.0, |x| velocity[x]));
            }
        }
        Self {
            epsilon: eps,
            grid: g.clone(),
            p1: pressure[layout.porous_pressure.clone()].to_vec(),
            p2: pressure[layout.channel_pressure.clone()].to_vec(),
            velocity,
            pressure,
            u1,
            v1,
            vt,
            vn,
            outer_iterations: 0,
            kkt_residual: 0.0,
        }
    }

    /// Normal velocity on the interface as seen from the porous side.
    pub fn interface_flux(&self) -> &[f64] {
        let g = &self.grid;
        &self.v1[g.ny * g.nx..]
    }
}

pub fn solve_epsilon(sys: &EpsilonSystem, settings: &SolverSettings) -> Result<EpsilonSolution> {
    solve_epsilon_from(sys, settings, None)
}

/// Solve starting the pressure iteration from `p0`.
pub fn solve_epsilon_from(sys: &EpsilonSystem, settings: &SolverSettings, p0: Option<&[f64]>) -> Result<EpsilonSolution> {
    let s = sys.saddle.solve(settings, p0)?;
    let mut sol = EpsilonSolution::from_vectors(sys.epsilon, &sys.grid, &sys.layout, s.velocity, s.pressure);
    sol.outer_iterations = s.outer_iterations;
    sol.kkt_residual = s.kkt_residual;
    Ok(sol)
}

/// `|v'Av - (v'f + p'h)| / (1 + |v'f + p'h|)`; the right side is the channel
/// work `eps <f, v>` plus the source work `<h, p1>`.
pub fn energy_identity_residual(sol: &EpsilonSolution, sys: &EpsilonSystem) -> f64 {
    let v = &sol.velocity;
    let lhs: f64 = sys.terms.all().iter().map(|t| t.quad_form(v)).sum();
    let rhs = dot(v, &sys.saddle.f) + dot(&sol.pressure, &sys.saddle.h);
    (lhs - rhs).abs() / (1.0 + rhs.abs())
}

pub const APRIORI_LABELS: [&str; 8] = [
    "v1_l2_sq",
    "grad_t_eps_vt_sq",
    "dz_vt_sq",
    "eps_grad_t_vn_sq",
    "dz_vn_sq",
    "vn_gamma_sq",
    "eps_vt_gamma_sq",
    "E",
];

/// The squared norms bounded uniformly in `eps`, followed by their sum.
pub fn apriori_quantities(sol: &EpsilonSolution) -> Vec<(&'static str, f64)> {
    let s = NormSuite::new(&sol.grid);
    let e = sol.epsilon;
    let sq = |x: f64| x * x;
    let parts = [
        sq(s.porous_l2(&sol.u1, &sol.v1)),
        sq(e * s.tangential_grad(&sol.vt)),
        sq(s.tangential_dz(&sol.vt)),
        sq(e * s.normal_grad(&sol.vn)),
        sq(s.normal_dz(&sol.vn)),
        sq(s.normal_trace(&sol.vn)),
        sq(e * s.tangential_trace(&sol.vt)),
    ];
    let total: f64 = parts.iter().sum();
    APRIORI_LABELS
        .iter()
        .copied()
        .zip(parts.iter().copied().chain([total]))
        .collect()
}

/// Cellwise mass residuals `(max |D1 v - h|, max |D2 v|)`.
pub fn mass_residuals(sol: &EpsilonSolution, sys: &EpsilonSystem) -> (f64, f64) {
    let bv = sys.saddle.b.matvec(&sol.velocity);
    let np = sys.layout.porous_pressure.len();
    let porous = bv[..np]
        .iter()
        .zip(&sys.saddle.h)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let chan = bv[np..].iter().map(|a| a.abs()).fold(0.0, f64::max);
    (porous, chan)
}

/// Velocity Gram matrix of `H(div)` on the porous block plus `H^1` on the channel.
pub fn velocity_gram(g: &GridPair, layout: &DofLayout) -> SparseSym {
    let n = layout.n_velocity();
    SparseSym::sum(&[&darcy::hdiv_gram(g, &layout.porous, n), &channel::h1_gram(g, layout)]).expect("same dimension")
}

pub fn pressure_mass(g: &GridPair, layout: &DofLayout) -> Vec<f64> {
    let mut m = vec![g.porous.cell_area(); layout.n_pressure()];
    for w in &mut m[layout.channel_pressure.clone()] {
        *w = g.channel.cell_area();
    }
    m
}

/// Full channel index of the same grid, for operator comparisons.
pub fn full_channel_index(g: &GridPair) -> FullChannelIndex {
    FullChannelIndex { nx: g.nx, nz: g.nz }
}
