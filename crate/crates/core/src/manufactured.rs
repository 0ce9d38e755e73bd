//! Manufactured solutions: closed-form fields plus the data that makes them
//! exact, for the porous problem alone, the limit problem, and the full
//! problem with a quiescent channel.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::coefficients::{CoefficientSet, Tensor2};
use crate::darcy;
use crate::epsilon::{assemble_epsilon, solve_epsilon, SaddleSystem};
use crate::error::{Error, Result};
use crate::forcing::{constant, FieldTriple, ForcingSet};
use crate::geometry::{build_grids, DomainSpec, GridPair};
use crate::limit::{assemble_limit, solve_limit};
use crate::norms::{diff, NormSuite};
use crate::solver::SolverSettings;

type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type VecField = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type LineField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    /// Porous block alone, pressure prescribed on the whole boundary.
    Darcy,
    /// Reduced problem with the interface line.
    Limit,
    /// Full thin-channel problem whose channel stays at rest.
    Embedded,
}

/// Porous fields with independently supplied derivatives.
#[derive(Clone)]
pub struct PorousFields {
    pub pressure: Field,
    pub grad_pressure: VecField,
    pub velocity: VecField,
    pub div_velocity: Field,
    pub source: Field,
}

/// Interface-line fields of the limit problem.
#[derive(Clone)]
pub struct LineFields {
    pub velocity: LineField,
    pub d_velocity: LineField,
    pub d2_velocity: LineField,
    pub pressure: LineField,
    pub d_pressure: LineField,
    pub force: LineField,
}

#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub kind: CaseKind,
    pub coefficients: CoefficientSet,
    /// The scheme reproduces the fields up to rounding.
    pub exact_by_scheme: bool,
    pub porous: PorousFields,
    pub line: Option<LineFields>,
}

pub const CASE_NAMES: [&str; 5] = ["darcy-linear", "darcy-linear-aniso", "darcy-sine", "limit-sine", "darcy-embedded"];

/// Channel thickness used by the embedded case.
pub const EMBEDDED_EPSILON: f64 = 0.25;

fn linear_darcy(name: &'static str, q: Tensor2) -> ManufacturedCase {
    // p = 0.5 + x - 2y, v = -Q^{-1} grad p
    let [vx, vy] = q.inverse().apply([-1.0, 2.0]);
    ManufacturedCase {
        name,
        kind: CaseKind::Darcy,
        coefficients: CoefficientSet { q, ..Default::default() },
        exact_by_scheme: true,
        porous: PorousFields {
            pressure: Arc::new(|x, y| 0.5 + x - 2.0 * y),
            grad_pressure: Arc::new(|_, _| (1.0, -2.0)),
            velocity: Arc::new(move |_, _| (vx, vy)),
            div_velocity: Arc::new(|_, _| 0.0),
            source: Arc::new(|_, _| 0.0),
        },
        line: None,
    }
}

fn sine_darcy() -> ManufacturedCase {
    // p = sin(pi x) sin(pi (y + 1) / 2) on (0,1) x (-1,0), Q = I
    let k = 0.5 * PI;
    ManufacturedCase {
        name: "darcy-sine",
        kind: CaseKind::Darcy,
        coefficients: CoefficientSet::default(),
        exact_by_scheme: false,
        porous: PorousFields {
            pressure: Arc::new(move |x, y| (PI * x).sin() * (k * (y + 1.0)).sin()),
            grad_pressure: Arc::new(move |x, y| {
                (PI * (PI * x).cos() * (k * (y + 1.0)).sin(), k * (PI * x).sin() * (k * (y + 1.0)).cos())
            }),
            velocity: Arc::new(move |x, y| {
                (-PI * (PI * x).cos() * (k * (y + 1.0)).sin(), -k * (PI * x).sin() * (k * (y + 1.0)).cos())
            }),
            div_velocity: Arc::new(move |x, y| (PI * PI + k * k) * (PI * x).sin() * (k * (y + 1.0)).sin()),
            source: Arc::new(move |x, y| (PI * PI + k * k) * (PI * x).sin() * (k * (y + 1.0)).sin()),
        },
        line: None,
    }
}

fn sine_limit() -> ManufacturedCase {
    // p1 = sin(2 pi x)(y + 1), g = -sin(2 pi x), V = (cos(2 pi x) - 1) / (2 pi),
    // P = (1 + mu + alpha) sin(2 pi x); alpha = beta = 0, Q = I, mu = 1.
    let c = CoefficientSet { alpha: 0.0, beta: 0.0, mu: 1.0, q: Tensor2::IDENTITY };
    let w = 2.0 * PI;
    let (mu, s) = (c.mu, c.beta * c.slip_factor().expect("valid"));
    let amp = 1.0 + c.mu + c.alpha;
    let line_v = move |x: f64| ((w * x).cos() - 1.0) / w;
    ManufacturedCase {
        name: "limit-sine",
        kind: CaseKind::Limit,
        coefficients: c,
        exact_by_scheme: false,
        porous: PorousFields {
            pressure: Arc::new(move |x, y| (w * x).sin() * (y + 1.0)),
            grad_pressure: Arc::new(move |x, y| (w * (w * x).cos() * (y + 1.0), (w * x).sin())),
            velocity: Arc::new(move |x, y| (-w * (w * x).cos() * (y + 1.0), -(w * x).sin())),
            div_velocity: Arc::new(move |x, y| w * w * (w * x).sin() * (y + 1.0)),
            source: Arc::new(move |x, y| w * w * (w * x).sin() * (y + 1.0)),
        },
        line: Some(LineFields {
            velocity: Arc::new(line_v),
            d_velocity: Arc::new(move |x| -(w * x).sin()),
            d2_velocity: Arc::new(move |x| -w * (w * x).cos()),
            pressure: Arc::new(move |x| amp * (w * x).sin()),
            d_pressure: Arc::new(move |x| amp * w * (w * x).cos()),
            force: Arc::new(move |x| mu * w * (w * x).cos() + s * line_v(x) + amp * w * (w * x).cos()),
        }),
    }
}

fn embedded_darcy() -> ManufacturedCase {
    // p = sin(pi x) sin^2(pi y): zero pressure and zero flux on the interface.
    ManufacturedCase {
        name: "darcy-embedded",
        kind: CaseKind::Embedded,
        coefficients: CoefficientSet { alpha: 0.5, ..Default::default() },
        exact_by_scheme: false,
        porous: PorousFields {
            pressure: Arc::new(|x, y| (PI * x).sin() * (PI * y).sin().powi(2)),
            grad_pressure: Arc::new(|x, y| {
                (PI * (PI * x).cos() * (PI * y).sin().powi(2), PI * (PI * x).sin() * (2.0 * PI * y).sin())
            }),
            velocity: Arc::new(|x, y| {
                (-PI * (PI * x).cos() * (PI * y).sin().powi(2), -PI * (PI * x).sin() * (2.0 * PI * y).sin())
            }),
            div_velocity: Arc::new(|x, y| {
                PI * PI * (PI * x).sin() * ((PI * y).sin().powi(2) - 2.0 * (2.0 * PI * y).cos())
            }),
            source: Arc::new(|x, y| PI * PI * (PI * x).sin() * ((PI * y).sin().powi(2) - 2.0 * (2.0 * PI * y).cos())),
        },
        line: None,
    }
}

impl ManufacturedCase {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "darcy-linear" => Ok(linear_darcy("darcy-linear", Tensor2::IDENTITY)),
            "darcy-linear-aniso" => Ok(linear_darcy("darcy-linear-aniso", Tensor2::diag(4.0, 1.0))),
            "darcy-sine" => Ok(sine_darcy()),
            "limit-sine" => Ok(sine_limit()),
            "darcy-embedded" => Ok(embedded_darcy()),
            other => Err(Error::UnknownCase(format!("{other} (known: {})", CASE_NAMES.join(", ")))),
        }
    }

    /// Largest strong-form residual of the closed-form fields on an 11 x 11
    /// sample of the porous block (and 11 interface points where relevant).
    pub fn residual_oracle(&self) -> f64 {
        let q = self.coefficients.q;
        let f = &self.porous;
        let mut r: f64 = 0.0;
        let samples = || (0..=10).map(|i| i as f64 / 10.0);
        for x in samples() {
            for t in samples() {
                let y = -t;
                let v = (f.velocity)(x, y);
                let gp = (f.grad_pressure)(x, y);
                let qv = q.apply([v.0, v.1]);
                r = r.max((qv[0] + gp.0).abs()).max((qv[1] + gp.1).abs());
                r = r.max(((f.div_velocity)(x, y) - (f.source)(x, y)).abs());
            }
        }
        let p = &f.pressure;
        match self.kind {
            CaseKind::Darcy => {}
            CaseKind::Embedded => {
                for s in samples() {
                    r = r.max(p(0.0, -s).abs()).max(p(1.0, -s).abs()).max(p(s, -1.0).abs());
                    r = r.max(p(s, 0.0).abs()).max((f.velocity)(s, 0.0).1.abs());
                }
            }
            CaseKind::Limit => {
                let l = self.line.as_ref().expect("limit case carries line fields");
                let c = &self.coefficients;
                let slip = c.beta * c.slip_factor().unwrap_or(f64::NAN);
                for s in samples() {
                    r = r.max(p(0.0, -s).abs()).max(p(1.0, -s).abs()).max(p(s, -1.0).abs());
                    let g = (f.velocity)(s, 0.0).1;
                    r = r.max(((l.d_velocity)(s) - g).abs());
                    r = r.max((p(s, 0.0) - (l.pressure)(s) - (c.mu + c.alpha) * g).abs());
                    let momentum = -c.mu * (l.d2_velocity)(s) + slip * (l.velocity)(s) + (l.d_pressure)(s) - (l.force)(s);
                    r = r.max(momentum.abs());
                }
                r = r.max((l.velocity)(0.0).abs()).max((l.velocity)(1.0).abs());
            }
        }
        r
    }

    fn forcing(&self) -> ForcingSet {
        let h = self.porous.source.clone();
        let f_t = match &self.line {
            Some(l) => {
                let force = l.force.clone();
                Arc::new(move |x: f64, _z: f64| force(x)) as Field
            }
            None => constant(0.0),
        };
        ForcingSet::custom(self.name, FieldTriple { f_t, f_n: constant(0.0), h1: h })
    }

    /// Solve at resolution `n` and return named L2 errors.
    pub fn errors_at(&self, n: usize, settings: &SolverSettings) -> Result<Vec<(&'static str, f64)>> {
        let (g, layout) = build_grids(DomainSpec::default(), n, n, n)?;
        let s = NormSuite::new(&g);
        let (eu, ev) = self.exact_faces(&g);
        let ep = self.exact_cells(&g);
        match self.kind {
            CaseKind::Darcy => {
                let dofs = layout.porous;
                let nv = dofs.len();
                let a = darcy::assemble_darcy_mass(&self.coefficients, &g, &dofs, nv)?;
                let b = darcy::assemble_divergence(&g, &dofs, nv);
                let pd = self.porous.pressure.clone();
                let f = darcy::boundary_pressure_load(&g, &dofs, nv, &move |x, y| pd(x, y));
                let h = self.cell_source(&g);
                let sol = SaddleSystem { a, b, f, h }.solve(settings, None)?;
                let u: Vec<f64> = dofs.vertical_range().map(|i| sol.velocity[i]).collect();
                let v: Vec<f64> = dofs.horizontal_range().map(|i| sol.velocity[i]).collect();
                Ok(vec![
                    ("p1", s.porous_cells_l2(&diff(&sol.pressure, &ep))),
                    ("v1", s.porous_l2(&diff(&u, &eu), &diff(&v, &ev))),
                ])
            }
            CaseKind::Limit => {
                let l = self.line.as_ref().expect("line fields");
                let sys = assemble_limit(&self.coefficients, &self.forcing(), &g)?;
                let sol = solve_limit(&sys, settings)?;
                let vt: Vec<f64> = (0..=n).map(|i| (l.velocity)(i as f64 * g.dx())).collect();
                let pl: Vec<f64> = (0..n).map(|i| (l.pressure)((i as f64 + 0.5) * g.dx())).collect();
                Ok(vec![
                    ("p1", s.porous_cells_l2(&diff(&sol.p1, &ep))),
                    ("v1", s.porous_l2(&diff(&sol.u1, &eu), &diff(&sol.v1, &ev))),
                    ("vT2", s.gamma_nodes_l2(&diff(&sol.line_velocity, &vt))),
                    ("p2", s.gamma_cells_l2(&diff(&sol.line_pressure, &pl))),
                ])
            }
            CaseKind::Embedded => {
                let sys = assemble_epsilon(&self.coefficients, &self.forcing(), &g, &layout, EMBEDDED_EPSILON)?;
                let sol = solve_epsilon(&sys, settings)?;
                Ok(vec![
                    ("p1", s.porous_cells_l2(&diff(&sol.p1, &ep))),
                    ("v1", s.porous_l2(&diff(&sol.u1, &eu), &diff(&sol.v1, &ev))),
                    ("channel", s.tangential_l2(&sol.vt) + s.normal_l2(&sol.vn) + s.channel_cells_l2(&sol.p2)),
                ])
            }
        }
    }

    fn exact_faces(&self, g: &GridPair) -> (Vec<f64>, Vec<f64>) {
        let vel = &self.porous.velocity;
        let mut u = Vec::with_capacity((g.nx + 1) * g.ny);
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let (x, y) = g.porous.vertical_face(i, j);
                u.push(vel(x, y).0);
            }
        }
        let mut v = Vec::with_capacity(g.nx * (g.ny + 1));
        for j in 0..=g.ny {
            for i in 0..g.nx {
                let (x, y) = g.porous.horizontal_face(i, j);
                v.push(vel(x, y).1);
            }
        }
        (u, v)
    }

    fn exact_cells(&self, g: &GridPair) -> Vec<f64> {
        g.porous.cell_centers().into_iter().map(|(x, y)| (self.porous.pressure)(x, y)).collect()
    }

    fn cell_source(&self, g: &GridPair) -> Vec<f64> {
        let a = g.porous.cell_area();
        g.porous.cell_centers().into_iter().map(|(x, y)| (self.porous.source)(x, y) * a).collect()
    }
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("coefficients", &self.coefficients)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_passes_its_oracle() {
        for name in CASE_NAMES {
            let c = ManufacturedCase::by_name(name).unwrap();
            assert!(c.residual_oracle() <= 1e-10, "{name}: {}", c.residual_oracle());
        }
    }

    #[test]
    fn oracle_catches_a_wrong_derivative() {
        let mut c = ManufacturedCase::by_name("darcy-sine").unwrap();
        c.porous.div_velocity = Arc::new(|x, y| (PI * x).sin() * (y + 1.0));
        assert!(c.residual_oracle() > 1e-3);
        let mut l = ManufacturedCase::by_name("limit-sine").unwrap();
        l.line.as_mut().unwrap().force = Arc::new(|x| (2.0 * PI * x).cos());
        assert!(l.residual_oracle() > 1e-3);
    }

    #[test]
    fn linear_cases_exact() {
        for name in ["darcy-linear", "darcy-linear-aniso"] {
            let c = ManufacturedCase::by_name(name).unwrap();
            for n in [3, 5, 8] {
                for (field, e) in c.errors_at(n, &SolverSettings::default()).unwrap() {
                    assert!(e <= 1e-12, "{name} n={n} {field}: {e:e}");
                }
            }
        }
    }

    #[test]
    fn unknown_case() {
        assert!(matches!(ManufacturedCase::by_name("nope"), Err(Error::UnknownCase(_))));
    }
}
