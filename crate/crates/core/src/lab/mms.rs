//! Refinement studies on manufactured cases.

use super::rates::{fit_rate, RateFit};
use crate::error::{Error, Result};
use crate::manufactured::ManufacturedCase;
use crate::solver::SolverSettings;

/// Oracle threshold a case must meet before it is run.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct MmsRow {
    pub level: usize,
    pub errors: Vec<(&'static str, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmsReport {
    pub case: &'static str,
    pub oracle_residual: f64,
    pub rows: Vec<MmsRow>,
    /// Observed order per field: slope of log error against log mesh width.
    pub orders: Vec<(&'static str, Option<RateFit>)>,
}

impl MmsReport {
    pub fn order(&self, field: &str) -> Option<RateFit> {
        self.orders.iter().find(|o| o.0 == field).and_then(|o| o.1)
    }

    pub fn max_error(&self, field: &str) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.errors.iter().filter(|e| e.0 == field).map(|e| e.1))
            .fold(0.0, f64::max)
    }
}

pub fn mms_convergence(case: &ManufacturedCase, levels: &[usize], settings: &SolverSettings) -> Result<MmsReport> {
    let oracle = case.residual_oracle();
    if !(oracle <= ORACLE_TOLERANCE) {
        return Err(Error::OracleFailure {
            case: case.name.to_string(),
            detail: format!("strong-form residual {oracle:e} exceeds {ORACLE_TOLERANCE:e}"),
        });
    }
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("levels must be nonempty and strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &n in levels {
        rows.push(MmsRow { level: n, errors: case.errors_at(n, settings)? });
    }
    let h: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
    let orders = rows[0]
        .errors
        .iter()
        .enumerate()
        .map(|(k, (name, _))| {
            let e: Vec<f64> = rows.iter().map(|r| r.errors[k].1).collect();
            (*name, fit_rate(&h, &e))
        })
        .collect();
    Ok(MmsReport { case: case.name, oracle_residual: oracle, rows, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn sine_case_converges() {
        let c = ManufacturedCase::by_name("darcy-sine").unwrap();
        let r = mms_convergence(&c, &[8, 16, 32], &SolverSettings::default()).unwrap();
        assert!(r.order("p1").unwrap().rate >= 0.9, "{r:?}");
        assert_eq!(r.rows.len(), 3);
    }

    #[test]
    fn inconsistent_case_aborts() {
        let mut c = ManufacturedCase::by_name("darcy-sine").unwrap();
        c.porous.source = Arc::new(|_, _| 1.0);
        assert!(matches!(
            mms_convergence(&c, &[4, 8], &SolverSettings::default()),
            Err(Error::OracleFailure { .. })
        ));
    }

    #[test]
    fn levels_must_increase() {
        let c = ManufacturedCase::by_name("darcy-linear").unwrap();
        assert!(mms_convergence(&c, &[8, 4], &SolverSettings::default()).is_err());
    }
}
