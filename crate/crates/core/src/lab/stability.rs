//! Stability diagnostics: numerical inf-sup constants across refinements and
//! the response of the solution to a fixed forcing perturbation.

use std::sync::Arc;

use crate::coefficients::CoefficientSet;
use crate::epsilon::{self, apriori_quantities, assemble_epsilon, solve_epsilon};
use crate::error::{Error, Result};
use crate::forcing::{FieldTriple, ForcingSet};
use crate::geometry::{build_grids, DomainSpec, GridPair};
use crate::limit::{self, assemble_limit, solve_limit, LimitSolution};
use crate::norms::{diff, NormSuite};
use crate::solver::{dense_inf_sup, estimate_inf_sup, InfSupOptions, SolverSettings};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    Epsilon(f64),
    Limit,
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Epsilon(_) => "eps",
            Problem::Limit => "limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfSupRow {
    pub problem: &'static str,
    pub level: usize,
    pub constant: f64,
    pub iterations: usize,
    /// Dense eigenvalue reference, computed on levels up to the dense cap.
    pub dense_constant: Option<f64>,
}

/// Inf-sup constants on `level x level x level` grids. Levels at or below
/// `dense_max_level` are also checked with the dense eigensolver.
pub fn infsup_study(problem: Problem, levels: &[usize], dense_max_level: usize) -> Result<Vec<InfSupRow>> {
    let mut rows = Vec::with_capacity(levels.len());
    for &n in levels {
        let (g, layout) = build_grids(DomainSpec::default(), n, n, n)?;
        let (b, gram, mass) = match problem {
            Problem::Epsilon(eps) => {
                let b = crate::darcy::assemble_divergence(&g, &layout.porous, layout.n_velocity())
                    .vstack(&crate::channel::assemble_channel_divergence(&g, &layout, eps)?)?;
                (b, epsilon::velocity_gram(&g, &layout), epsilon::pressure_mass(&g, &layout))
            }
            Problem::Limit => {
                let sys = assemble_limit(&CoefficientSet::default(), &ForcingSet::zero(), &g)?;
                let l = &sys.layout;
                (sys.saddle.b.clone(), limit::velocity_gram(&g, l), limit::pressure_mass(&g, l))
            }
        };
        let est = estimate_inf_sup(&b, &gram, &mass, &InfSupOptions::default())?;
        let dense_constant = (n <= dense_max_level).then(|| dense_inf_sup(&b, &gram, &mass));
        rows.push(InfSupRow {
            problem: problem.name(),
            level: n,
            constant: est.constant,
            iterations: est.iterations,
            dense_constant,
        });
    }
    Ok(rows)
}

/// Smooth forcing perturbation used by the stability probe.
pub fn perturbation_forcing() -> ForcingSet {
    use std::f64::consts::PI;
    ForcingSet::custom(
        "perturbation",
        FieldTriple {
            f_t: Arc::new(|x, z| 0.1 * (PI * x).sin() * (PI * z).cos()),
            f_n: Arc::new(|x, z| 0.1 * x * (1.0 - x) * z),
            h1: Arc::new(|x, y| 0.1 * (PI * x).cos() * (y + 1.0)),
        },
    )
}

fn sum_forcing(a: &ForcingSet, b: &ForcingSet) -> ForcingSet {
    let (fa, fb) = (a.clone(), b.clone());
    let pick = move |sel: fn(&FieldTriple) -> &crate::forcing::ScalarField| {
        let (x, y) = (sel(&fa.base).clone(), sel(&fb.base).clone());
        Arc::new(move |p: f64, q: f64| x(p, q) + y(p, q)) as crate::forcing::ScalarField
    };
    ForcingSet::custom(
        "perturbed",
        FieldTriple { f_t: pick(|t| &t.f_t), f_n: pick(|t| &t.f_n), h1: pick(|t| &t.h1) },
    )
}

/// `L2` size of the sampled perturbation: channel force plus porous source.
fn perturbation_size(g: &GridPair, eps: Option<f64>) -> Result<f64> {
    let d = match eps {
        Some(e) => crate::forcing::forcing_at(&perturbation_forcing(), e, g)?,
        None => crate::forcing::limit_forcing(&perturbation_forcing(), g),
    };
    let s = NormSuite::new(g);
    let size = s.tangential_l2(&d.f_t) + s.normal_l2(&d.f_n) + s.porous_cells_l2(&d.h1);
    if size > 0.0 {
        Ok(size)
    } else {
        Err(Error::SingularSystem("zero perturbation".into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySample {
    pub problem: &'static str,
    pub level: usize,
    pub epsilon: Option<f64>,
    /// `(sqrt(E(dv)) + |dp1| + |dp2|) / |delta|`.
    pub ratio: f64,
    /// Two solves of the same system agree bit for bit.
    pub repeatable: bool,
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Response of the thin-channel problem at `(n, eps)` to the perturbation on
/// top of `base`.
pub fn epsilon_stability(
    c: &CoefficientSet,
    base: &ForcingSet,
    n: usize,
    eps: f64,
    settings: &SolverSettings,
) -> Result<StabilitySample> {
    let (g, layout) = build_grids(DomainSpec::default(), n, n, n)?;
    let s0 = assemble_epsilon(c, base, &g, &layout, eps)?;
    let s1 = assemble_epsilon(c, &sum_forcing(base, &perturbation_forcing()), &g, &layout, eps)?;
    let a = solve_epsilon(&s0, settings)?;
    let b = solve_epsilon(&s1, settings)?;
    let again = solve_epsilon(&s1, settings)?;
    let d = epsilon::EpsilonSolution::from_vectors(
        eps,
        &g,
        &layout,
        diff(&b.velocity, &a.velocity),
        diff(&b.pressure, &a.pressure),
    );
    let e = apriori_quantities(&d).last().map_or(0.0, |q| q.1);
    let ns = NormSuite::new(&g);
    let response = e.sqrt() + ns.porous_cells_l2(&d.p1) + ns.channel_cells_l2(&d.p2);
    Ok(StabilitySample {
        problem: "eps",
        level: n,
        epsilon: Some(eps),
        ratio: response / perturbation_size(&g, Some(eps))?,
        repeatable: bits(&b.velocity) == bits(&again.velocity) && bits(&b.pressure) == bits(&again.pressure),
    })
}

/// Energy-type norm of a limit solution: porous velocity, line velocity in
/// `H^1`, interface flux.
fn limit_energy(sol: &LimitSolution) -> f64 {
    let s = NormSuite::new(&sol.grid);
    let sq = |x: f64| x * x;
    sq(s.porous_l2(&sol.u1, &sol.v1))
        + sq(s.gamma_nodes_grad(&sol.line_velocity))
        + sq(s.gamma_nodes_l2(&sol.line_velocity))
        + sq(s.gamma_cells_l2(&sol.flux))
}

pub fn limit_stability(c: &CoefficientSet, base: &ForcingSet, n: usize, settings: &SolverSettings) -> Result<StabilitySample> {
    let (g, _) = build_grids(DomainSpec::default(), n, n, n)?;
    let s0 = assemble_limit(c, base, &g)?;
    let s1 = assemble_limit(c, &sum_forcing(base, &perturbation_forcing()), &g)?;
    let a = solve_limit(&s0, settings)?;
    let b = solve_limit(&s1, settings)?;
    let again = solve_limit(&s1, settings)?;
    let d = LimitSolution::from_vectors(
        &g,
        &s0.layout,
        diff(&b.velocity, &a.velocity),
        diff(&b.pressure, &a.pressure),
    );
    let ns = NormSuite::new(&g);
    let response = limit_energy(&d).sqrt() + ns.porous_cells_l2(&d.p1) + ns.gamma_cells_l2(&d.line_pressure);
    Ok(StabilitySample {
        problem: "limit",
        level: n,
        epsilon: None,
        ratio: response / perturbation_size(&g, None)?,
        repeatable: bits(&b.velocity) == bits(&again.velocity) && bits(&b.pressure) == bits(&again.pressure),
    })
}

/// Largest over smallest ratio among the samples.
pub fn ratio_spread(samples: &[StabilitySample]) -> f64 {
    let max = samples.iter().map(|s| s.ratio).fold(f64::MIN, f64::max);
    let min = samples.iter().map(|s| s.ratio).fold(f64::MAX, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::PresetParams;

    #[test]
    fn dense_and_iterative_agree_on_small_grids() {
        for p in [Problem::Epsilon(0.25), Problem::Limit] {
            for row in infsup_study(p, &[4, 6], 6).unwrap() {
                let d = row.dense_constant.unwrap();
                assert!((row.constant - d).abs() <= 1e-6, "{row:?}");
                assert!(row.constant > 0.0);
            }
        }
    }

    #[test]
    fn stability_sample_is_repeatable_and_linear() {
        let c = CoefficientSet::default();
        let base = ForcingSet::preset("constant", &PresetParams::default()).unwrap();
        let s1 = epsilon_stability(&c, &base, 6, 0.25, &SolverSettings::default()).unwrap();
        let s2 = epsilon_stability(&c, &ForcingSet::zero(), 6, 0.25, &SolverSettings::default()).unwrap();
        assert!(s1.repeatable);
        assert!((s1.ratio - s2.ratio).abs() < 1e-8 * s2.ratio);
        let l = limit_stability(&c, &base, 6, &SolverSettings::default()).unwrap();
        assert!(l.repeatable && l.ratio > 0.0);
    }
}
