//! Acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not fail
//! the process; the README explains why they do not hold on this
//! discretisation. Set `FRACFLOW_ACCEPTANCE_STRICT=1` to make every failure
//! fatal.

use std::process::ExitCode;
use std::time::Instant;

use fracflow::coefficients::CoefficientSet;
use fracflow::epsilon::{assemble_epsilon, solve_epsilon};
use fracflow::forcing::{ForcingSet, PresetParams};
use fracflow::geometry::{build_grids, DomainSpec};
use fracflow::lab::stability::ratio_spread;
use fracflow::lab::{
    epsilon_stability, fit_rate, infsup_study, limit_stability, mms_convergence, run_sweep, ConvergenceReport, Problem,
    SweepSetup,
};
use fracflow::limit::{assemble_limit, pressure_identity_residual, solve_limit};
use fracflow::manufactured::ManufacturedCase;
use fracflow::solver::SolverSettings;

const KNOWN_FAILURES: [&str; 2] = ["A2", "A4"];

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: &'static str, checks: Vec<(bool, String)>) -> Outcome {
    let passed = checks.iter().all(|c| c.0);
    let detail = checks
        .into_iter()
        .map(|(ok, d)| if ok { d } else { format!("[x] {d}") })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { id, passed, detail }
}

fn column(r: &ConvergenceReport, name: &str) -> Vec<(f64, f64)> {
    r.series(name).into_iter().map(|(e, v)| (e, v.unwrap_or(f64::NAN))).collect()
}

fn at(series: &[(f64, f64)], eps: f64) -> f64 {
    series.iter().find(|p| p.0 == eps).map_or(f64::NAN, |p| p.1)
}

fn sweep_report() -> (ConvergenceReport, f64) {
    let setup = SweepSetup::new(
        64,
        64,
        64,
        CoefficientSet::default(),
        ForcingSet::preset("constant", &PresetParams::default()).unwrap(),
    );
    let t = Instant::now();
    let r = run_sweep(&setup).expect("sweep runs");
    (r, t.elapsed().as_secs_f64())
}

fn a1(r: &ConvergenceReport, seconds: f64) -> Outcome {
    let solved = r.rows.iter().all(|row| row.outcome.is_ok());
    let worst = column(r, "energy_residual").iter().map(|p| p.1).fold(0.0, f64::max);
    let per_eps = seconds / r.rows.len() as f64;
    outcome(
        "A1",
        vec![
            (solved, format!("all {} epsilons solved", r.rows.len())),
            (worst <= 1e-10, format!("max energy residual {worst:.3e} <= 1e-10")),
            (per_eps <= 60.0, format!("{per_eps:.1}s per epsilon <= 60s")),
        ],
    )
}

fn a2(r: &ConvergenceReport) -> Outcome {
    let e = column(r, "apriori_E");
    let max = e.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let min = e.iter().map(|p| p.1).fold(f64::MAX, f64::min);
    let (xs, ys): (Vec<f64>, Vec<f64>) = e.iter().copied().unzip();
    let slope = fit_rate(&xs, &ys).map_or(f64::NAN, |f| f.rate);
    outcome(
        "A2",
        vec![
            (max / min <= 10.0, format!("E max/min {:.3} <= 10", max / min)),
            (slope.abs() <= 0.2, format!("|log-log slope| {:.3} <= 0.2", slope.abs())),
        ],
    )
}

fn a3(r: &ConvergenceReport) -> Outcome {
    let mut checks = Vec::new();
    for col in ["err_v1_hdiv", "err_vT", "err_vN_hdz", "err_p1", "err_p2"] {
        let s = column(r, col);
        let ratio = at(&s, 1.0 / 64.0) / at(&s, 1.0 / 8.0);
        checks.push((ratio <= 0.25, format!("{col} 1/64:1/8 {ratio:.3} <= 0.25")));
        let f = r.rate(col);
        let (rate, r2) = f.map_or((f64::NAN, f64::NAN), |f| (f.rate, f.r2));
        checks.push((rate > 0.0 && r2 >= 0.9, format!("{col} rate {rate:.3} r2 {r2:.3}")));
    }
    outcome("A3", checks)
}

fn a4(r: &ConvergenceReport) -> Outcome {
    let checks = ["err_dz_vT", "vanish_gradT_epsvN"]
        .into_iter()
        .map(|col| {
            let s = column(r, col);
            let shrink = s[0].1 / s[s.len() - 1].1;
            (shrink >= 4.0, format!("{col} shrinks {shrink:.2}x >= 4"))
        })
        .collect();
    outcome("A4", checks)
}

fn a5(r: &ConvergenceReport) -> Outcome {
    let s = column(r, "ratio_T_N");
    let checks = s
        .windows(2)
        .map(|w| {
            let g = w[1].1 / w[0].1;
            (g >= 1.8, format!("{:.4}->{:.4}: {g:.3}", w[0].0, w[1].0))
        })
        .collect();
    outcome("A5", checks)
}

fn a6() -> Outcome {
    let c = CoefficientSet::default();
    let fs = ForcingSet::preset("constant", &PresetParams::default()).unwrap();
    let settings = SolverSettings::default();
    let mut checks = Vec::new();

    let (g, layout) = build_grids(DomainSpec::default(), 64, 64, 64).unwrap();
    let mut mismatched = 0;
    for eps in [0.5, 1.0 / 64.0] {
        let sys = assemble_epsilon(&c, &fs, &g, &layout, eps).unwrap();
        let sol = solve_epsilon(&sys, &settings).unwrap();
        mismatched += sol
            .interface_flux()
            .iter()
            .zip(&sol.vn[..g.nx])
            .filter(|(a, b)| a.to_bits() != b.to_bits())
            .count();
    }
    checks.push((mismatched == 0, format!("{mismatched} interface faces differ in bits")));

    let res: Vec<f64> = [16, 32, 64]
        .into_iter()
        .map(|n| {
            let (g, _) = build_grids(DomainSpec::default(), n, n, n).unwrap();
            let sol = solve_limit(&assemble_limit(&c, &fs, &g).unwrap(), &settings).unwrap();
            pressure_identity_residual(&sol, &c)
        })
        .collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        checks.push(((1.4..=2.6).contains(&ratio), format!("pressure identity halving {ratio:.3} in 1.4..2.6")));
    }
    outcome("A6", checks)
}

fn a7() -> Outcome {
    let mut checks = Vec::new();
    for p in [Problem::Epsilon(0.25), Problem::Limit] {
        let rows = infsup_study(p, &[8, 16, 32], 0).unwrap();
        let c: Vec<f64> = rows.iter().map(|r| r.constant).collect();
        let max = c.iter().copied().fold(f64::MIN, f64::max);
        let min = c.iter().copied().fold(f64::MAX, f64::min);
        let variation = max / min - 1.0;
        checks.push((
            variation <= 0.2,
            format!("{} constants {:.4}/{:.4}/{:.4} vary {:.1}%", p.name(), c[0], c[1], c[2], 100.0 * variation),
        ));
        for r in infsup_study(p, &[8, 12], 12).unwrap() {
            let gap = (r.constant - r.dense_constant.unwrap_or(f64::NAN)).abs();
            checks.push((gap <= 1e-6, format!("{} level {} dense gap {gap:.1e}", p.name(), r.level)));
        }
    }
    outcome("A7", checks)
}

fn a8() -> Outcome {
    let settings = SolverSettings::default();
    let mut checks = Vec::new();
    for name in ["darcy-sine", "limit-sine", "darcy-embedded"] {
        let case = ManufacturedCase::by_name(name).unwrap();
        let report = mms_convergence(&case, &[16, 32, 64], &settings).unwrap();
        for (field, fit) in &report.orders {
            let order = fit.map_or(f64::NAN, |f| f.rate);
            checks.push((order >= 0.9, format!("{name} {field} order {order:.2}")));
        }
    }
    for name in ["darcy-linear", "darcy-linear-aniso"] {
        let case = ManufacturedCase::by_name(name).unwrap();
        let worst = [4, 8, 16]
            .into_iter()
            .flat_map(|n| case.errors_at(n, &settings).unwrap())
            .map(|e| e.1)
            .fold(0.0, f64::max);
        checks.push((worst <= 1e-12, format!("{name} max error {worst:.1e} <= 1e-12")));
    }
    outcome("A8", checks)
}

fn a9() -> Outcome {
    let c = CoefficientSet::default();
    let base = ForcingSet::preset("constant", &PresetParams::default()).unwrap();
    let settings = SolverSettings::default();
    let mut eps_samples = Vec::new();
    let mut lim_samples = Vec::new();
    for n in [16, 32] {
        for eps in [0.25, 0.0625] {
            eps_samples.push(epsilon_stability(&c, &base, n, eps, &settings).unwrap());
        }
        lim_samples.push(limit_stability(&c, &base, n, &settings).unwrap());
    }
    let spread_eps = ratio_spread(&eps_samples);
    let spread_lim = ratio_spread(&lim_samples);
    let repeatable = eps_samples.iter().chain(&lim_samples).all(|s| s.repeatable);
    outcome(
        "A9",
        vec![
            (spread_eps <= 2.0, format!("thin-channel ratio spread {spread_eps:.3} <= 2")),
            (spread_lim <= 2.0, format!("limit ratio spread {spread_lim:.3} <= 2")),
            (repeatable, "repeated solves bit-identical".to_string()),
        ],
    )
}

fn main() -> ExitCode {
    let strict = std::env::var_os("FRACFLOW_ACCEPTANCE_STRICT").is_some();
    let (report, seconds) = sweep_report();
    let outcomes = [
        a1(&report, seconds),
        a2(&report),
        a3(&report),
        a4(&report),
        a5(&report),
        a6(),
        a7(),
        a8(),
        a9(),
    ];
    let mut fatal = 0;
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&o.id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{} {tag} {}", o.id, o.detail);
        if !o.passed && (strict || !known) {
            fatal += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} passed", outcomes.len());
    if fatal > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
