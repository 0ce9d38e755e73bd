//! The invariant suite behind `fracflow check`.

use std::path::Path;

use anyhow::Result;
use fracflow::epsilon::{assemble_epsilon, solve_epsilon};
use fracflow::geometry::build_grids;
use fracflow::lab::{fit_rate, run_sweep, ConvergenceReport};
use fracflow::limit::{assemble_limit, pressure_identity_residual, solve_limit};
use fracflow::manufactured::{ManufacturedCase, CASE_NAMES};

use crate::commands::sweep_setup;
use crate::config::RunConfig;
use crate::csv::{num, write_table};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, value: f64, threshold: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value, threshold: threshold.into() }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} value={} threshold={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            num(self.value),
            self.threshold
        )
    }
}

pub const STRONG_COLUMNS: [&str; 5] = ["err_v1_hdiv", "err_vT", "err_vN_hdz", "err_p1", "err_p2"];

fn column(report: &ConvergenceReport, name: &str) -> Vec<(f64, f64)> {
    report.series(name).into_iter().filter_map(|(e, v)| v.map(|v| (e, v))).collect()
}

fn sweep_checks(report: &ConvergenceReport, out: &mut Vec<CheckResult>) {
    let failed = report.rows.iter().filter(|r| r.outcome.is_err()).count();
    out.push(CheckResult::new("sweep_rows_solved", failed == 0, failed as f64, "0 failures"));

    let energy = column(report, "energy_residual").iter().map(|p| p.1).fold(0.0, f64::max);
    out.push(CheckResult::new("energy_identity", energy <= 1e-10, energy, "<= 1e-10"));

    let e = column(report, "apriori_E");
    if e.len() >= 2 {
        let max = e.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let min = e.iter().map(|p| p.1).fold(f64::MAX, f64::min);
        out.push(CheckResult::new("apriori_spread", max <= 10.0 * min, max / min, "<= 10"));
        let (xs, ys): (Vec<f64>, Vec<f64>) = e.iter().copied().unzip();
        if let Some(f) = fit_rate(&xs, &ys) {
            out.push(CheckResult::new("apriori_slope", f.rate.abs() <= 0.2, f.rate, "|slope| <= 0.2"));
        }
    }

    for col in STRONG_COLUMNS {
        let s = column(report, col);
        if s.len() < 2 {
            continue;
        }
        let (last_eps, last) = *s.last().expect("nonempty");
        // Reference row: closest in log scale to eight times the smallest epsilon.
        let target = (8.0 * last_eps).ln();
        let (_, reference) = s[..s.len() - 1]
            .iter()
            .copied()
            .min_by(|a, b| (a.0.ln() - target).abs().total_cmp(&(b.0.ln() - target).abs()))
            .expect("at least two rows");
        out.push(CheckResult::new(format!("decay_{col}"), last <= 0.25 * reference, last / reference, "<= 0.25"));
        if let Some(f) = report.rate(col) {
            out.push(CheckResult::new(format!("rate_{col}"), f.rate > 0.0 && f.r2 >= 0.9, f.rate, "> 0 with r2 >= 0.9"));
        }
    }

    for col in ["err_dz_vT", "vanish_gradT_epsvN"] {
        let s = column(report, col);
        if s.len() >= 2 {
            let shrink = s[0].1 / s[s.len() - 1].1;
            out.push(CheckResult::new(format!("shrink_{col}"), shrink >= 4.0, shrink, ">= 4"));
        }
    }

    let r = column(report, "ratio_T_N");
    if r.len() >= 2 {
        // Growth per pair, normalised to a halving of epsilon.
        let worst = r
            .windows(2)
            .map(|w| (w[1].1 / w[0].1) * (2.0 * w[1].0 / w[0].0))
            .fold(f64::INFINITY, f64::min);
        out.push(CheckResult::new("ratio_growth", worst >= 1.8, worst, ">= 1.8 per halving"));
    }
}

fn interface_checks(c: &RunConfig, out: &mut Vec<CheckResult>) -> Result<()> {
    let eps = *c.epsilons.last().expect("validated list");
    let (g, layout) = build_grids(c.domain, c.nx, c.ny, c.nz)?;
    let sys = assemble_epsilon(&c.coefficients, &c.forcing_set(), &g, &layout, eps)?;
    let sol = solve_epsilon(&sys, &c.settings)?;
    let mismatched = sol
        .interface_flux()
        .iter()
        .zip(&sol.vn[..g.nx])
        .filter(|(a, b)| a.to_bits() != b.to_bits())
        .count();
    out.push(CheckResult::new("interface_shared", mismatched == 0, mismatched as f64, "0 mismatched faces"));

    if c.nx % 4 == 0 && c.nx / 4 >= 2 {
        let mut res = Vec::new();
        for div in [4, 2, 1] {
            let (nx, ny, nz) = (c.nx / div, (c.ny / div).max(2), (c.nz / div).max(2));
            let (g, _) = build_grids(c.domain, nx, ny, nz)?;
            let sol = solve_limit(&assemble_limit(&c.coefficients, &c.forcing_set(), &g)?, &c.settings)?;
            res.push(pressure_identity_residual(&sol, &c.coefficients));
        }
        let ratios: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
        let ok = ratios.iter().all(|r| (1.4..=2.6).contains(r));
        let worst = ratios.iter().copied().max_by(|a, b| (a - 2.0).abs().total_cmp(&(b - 2.0).abs())).unwrap_or(f64::NAN);
        out.push(CheckResult::new("pressure_identity_halving", ok, worst, "ratio in 1.4..2.6"));
    }
    Ok(())
}

fn oracle_checks(out: &mut Vec<CheckResult>) -> Result<()> {
    let mut worst: f64 = 0.0;
    for name in CASE_NAMES {
        worst = worst.max(ManufacturedCase::by_name(name)?.residual_oracle());
    }
    out.push(CheckResult::new("manufactured_oracles", worst <= 1e-10, worst, "<= 1e-10"));
    Ok(())
}

pub fn run_checks(c: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let report = run_sweep(&sweep_setup(c))?;
    sweep_checks(&report, &mut out);
    interface_checks(c, &mut out)?;
    oracle_checks(&mut out)?;
    Ok(out)
}

/// Writes `check.csv`, prints one line per check, returns whether all passed.
pub fn check(c: &RunConfig, dir: &Path) -> Result<bool> {
    let results = run_checks(c)?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| vec![r.name.clone(), r.passed.to_string(), num(r.value), r.threshold.clone()])
        .collect();
    write_table(dir, "check.csv", &["check", "passed", "value", "threshold"], &rows)?;
    for r in &results {
        println!("{}", r.line());
    }
    Ok(results.iter().all(|r| r.passed))
}
