//! The epsilon sweep: one limit solve, one thin-channel solve per epsilon.

use rayon::prelude::*;

use super::compare::{compare_to_limit, ComparisonRow, COLUMNS};
use super::rates::{fit_rate, RateFit};
use crate::coefficients::CoefficientSet;
use crate::epsilon::{apriori_quantities, assemble_epsilon, energy_identity_residual, solve_epsilon};
use crate::error::{Error, Result};
use crate::forcing::ForcingSet;
use crate::geometry::{build_grids, DomainSpec};
use crate::limit::{assemble_limit, solve_limit, LimitSolution};
use crate::solver::SolverSettings;

pub const DEFAULT_EPSILONS: [f64; 6] = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub domain: DomainSpec,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub coefficients: CoefficientSet,
    pub forcing: ForcingSet,
    pub epsilons: Vec<f64>,
    pub settings: SolverSettings,
}

impl SweepSetup {
    pub fn new(nx: usize, ny: usize, nz: usize, coefficients: CoefficientSet, forcing: ForcingSet) -> Self {
        Self {
            domain: DomainSpec::default(),
            nx,
            ny,
            nz,
            coefficients,
            forcing,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            settings: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::InvalidEpsilon(f64::NAN));
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidEpsilon(e));
            }
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidCoefficient("epsilon list must be strictly decreasing".into()));
        }
        self.coefficients.validate()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub epsilon: f64,
    pub outcome: std::result::Result<ComparisonRow, Error>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    /// One entry per fitted column, `None` with fewer than two usable points.
    pub rates: Vec<(&'static str, Option<RateFit>)>,
    pub limit: LimitSolution,
}

impl ConvergenceReport {
    /// Column values over the successful rows, in row order.
    pub fn series(&self, column: &str) -> Vec<(f64, Option<f64>)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|c| (r.epsilon, c.column(column))))
            .collect()
    }

    pub fn rate(&self, column: &str) -> Option<RateFit> {
        self.rates.iter().find(|r| r.0 == column).and_then(|r| r.1)
    }
}

/// Columns that get a rate fit: everything but epsilon and the energy residual.
pub fn fitted_columns() -> impl Iterator<Item = &'static str> {
    COLUMNS.iter().copied().filter(|c| *c != "epsilon" && *c != "energy_residual")
}

fn solve_row(setup: &SweepSetup, lim: &LimitSolution, eps: f64) -> Result<ComparisonRow> {
    let (g, layout) = build_grids(setup.domain, setup.nx, setup.ny, setup.nz)?;
    let sys = assemble_epsilon(&setup.coefficients, &setup.forcing, &g, &layout, eps)?;
    let sol = solve_epsilon(&sys, &setup.settings)?;
    let energy = energy_identity_residual(&sol, &sys);
    let e = apriori_quantities(&sol).last().map_or(0.0, |q| q.1);
    compare_to_limit(&sol, lim, &setup.coefficients, energy, e)
}

pub fn run_sweep(setup: &SweepSetup) -> Result<ConvergenceReport> {
    setup.validate()?;
    let (g, _) = build_grids(setup.domain, setup.nx, setup.ny, setup.nz)?;
    let lsys = assemble_limit(&setup.coefficients, &setup.forcing, &g)?;
    let limit = solve_limit(&lsys, &setup.settings)?;
    let rows: Vec<SweepRow> = setup
        .epsilons
        .par_iter()
        .map(|&eps| SweepRow {
            epsilon: eps,
            outcome: solve_row(setup, &limit, eps),
        })
        .collect();
    let rates = fitted_columns()
        .map(|col| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| r.outcome.as_ref().ok().and_then(|c| c.column(col)).map(|v| (r.epsilon, v)))
                .unzip();
            (col, fit_rate(&xs, &ys))
        })
        .collect();
    Ok(ConvergenceReport { rows, rates, limit })
}
