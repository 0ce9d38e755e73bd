//! Subcommand bodies. Each returns the paths it wrote.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fracflow::epsilon::{
    apriori_quantities, assemble_epsilon, energy_identity_residual, mass_residuals, solve_epsilon, EpsilonSolution,
};
use fracflow::geometry::{build_grids, GridPair};
use fracflow::lab::{infsup_study, mms_convergence, run_sweep, velocity_ratio, Problem, SweepSetup, COLUMNS};
use fracflow::limit::{assemble_limit, pressure_identity_residual, solve_limit, LimitSolution};
use fracflow::manufactured::ManufacturedCase;
use fracflow::norms::NormSuite;
use fracflow::solver::SolverSettings;

use crate::config::{parse_config, RunConfig};
use crate::csv::{num, opt, write_table};

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_config(&text)?)
}

pub fn sweep_setup(c: &RunConfig) -> SweepSetup {
    SweepSetup {
        domain: c.domain,
        nx: c.nx,
        ny: c.ny,
        nz: c.nz,
        coefficients: c.coefficients,
        forcing: c.forcing_set(),
        epsilons: c.epsilons.clone(),
        settings: c.settings.clone(),
    }
}

fn kv(rows: &[(&str, f64)]) -> Vec<Vec<String>> {
    rows.iter().map(|(k, v)| vec![k.to_string(), num(*v)]).collect()
}

fn xy_rows(points: impl IntoIterator<Item = (f64, f64)>, values: &[f64]) -> Vec<Vec<String>> {
    points
        .into_iter()
        .zip(values)
        .map(|((x, y), v)| vec![num(x), num(y), num(*v)])
        .collect()
}

fn porous_faces(g: &GridPair) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut vert = Vec::new();
    for j in 0..g.ny {
        for i in 0..=g.nx {
            vert.push(g.porous.vertical_face(i, j));
        }
    }
    let mut horiz = Vec::new();
    for j in 0..=g.ny {
        for i in 0..g.nx {
            horiz.push(g.porous.horizontal_face(i, j));
        }
    }
    (vert, horiz)
}

fn channel_faces(g: &GridPair) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let mut vert = Vec::new();
    for k in 0..g.nz {
        for i in 0..=g.nx {
            vert.push(g.channel.vertical_face(i, k));
        }
    }
    let mut horiz = Vec::new();
    for k in 0..=g.nz {
        for i in 0..g.nx {
            horiz.push(g.channel.horizontal_face(i, k));
        }
    }
    (vert, horiz)
}

fn dump_porous(dir: &Path, g: &GridPair, p1: &[f64], u1: &[f64], v1: &[f64]) -> Result<()> {
    let (vert, horiz) = porous_faces(g);
    write_table(dir, "p1.csv", &["x", "y", "value"], &xy_rows(g.porous.cell_centers(), p1))?;
    write_table(dir, "v1_x.csv", &["x", "y", "value"], &xy_rows(vert, u1))?;
    write_table(dir, "v1_y.csv", &["x", "y", "value"], &xy_rows(horiz, v1))
}

fn dump_epsilon(dir: &Path, s: &EpsilonSolution) -> Result<()> {
    let g = &s.grid;
    dump_porous(dir, g, &s.p1, &s.u1, &s.v1)?;
    let (vert, horiz) = channel_faces(g);
    write_table(dir, "p2.csv", &["x", "z", "value"], &xy_rows(g.channel.cell_centers(), &s.p2))?;
    write_table(dir, "vT2.csv", &["x", "z", "value"], &xy_rows(vert, &s.vt))?;
    write_table(dir, "vN2.csv", &["x", "z", "value"], &xy_rows(horiz, &s.vn))
}

fn dump_limit(dir: &Path, s: &LimitSolution) -> Result<()> {
    let g = &s.grid;
    dump_porous(dir, g, &s.p1, &s.u1, &s.v1)?;
    let dx = g.dx();
    let cells: Vec<Vec<String>> = s
        .line_pressure
        .iter()
        .enumerate()
        .map(|(i, v)| vec![num((i as f64 + 0.5) * dx), num(*v)])
        .collect();
    let nodes: Vec<Vec<String>> = s
        .line_velocity
        .iter()
        .enumerate()
        .map(|(i, v)| vec![num(i as f64 * dx), num(*v)])
        .collect();
    write_table(dir, "p2.csv", &["x", "value"], &cells)?;
    write_table(dir, "vT2.csv", &["x", "value"], &nodes)?;
    let (_, horiz) = channel_faces(g);
    write_table(dir, "xi.csv", &["x", "z", "value"], &xy_rows(horiz, &s.xi))
}

pub fn solve_eps(c: &RunConfig, eps: f64, dump: bool, out: &Path) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
        bail!("epsilon must lie in (0, 1), got {eps}");
    }
    let (g, layout) = build_grids(c.domain, c.nx, c.ny, c.nz)?;
    let sys = assemble_epsilon(&c.coefficients, &c.forcing_set(), &g, &layout, eps)?;
    let sol = solve_epsilon(&sys, &c.settings)?;
    let (mp, mc) = mass_residuals(&sol, &sys);
    let mut rows = vec![
        ("epsilon", eps),
        ("outer_iterations", sol.outer_iterations as f64),
        ("kkt_residual", sol.kkt_residual),
        ("energy_residual", energy_identity_residual(&sol, &sys)),
        ("mass_residual_porous", mp),
        ("mass_residual_channel", mc),
    ];
    rows.extend(apriori_quantities(&sol));
    let mut table = kv(&rows);
    table.push(vec!["ratio_T_N".into(), opt(velocity_ratio(&sol))]);
    write_table(out, "eps_summary.csv", &["quantity", "value"], &table)?;
    if dump {
        dump_epsilon(out, &sol)?;
    }
    Ok(())
}

pub fn solve_lim(c: &RunConfig, dump: bool, out: &Path) -> Result<()> {
    let (g, _) = build_grids(c.domain, c.nx, c.ny, c.nz)?;
    let sys = assemble_limit(&c.coefficients, &c.forcing_set(), &g)?;
    let sol = solve_limit(&sys, &c.settings)?;
    let s = NormSuite::new(&g);
    let rows = [
        ("outer_iterations", sol.outer_iterations as f64),
        ("kkt_residual", sol.kkt_residual),
        ("pressure_identity_residual", pressure_identity_residual(&sol, &c.coefficients)),
        ("v1_l2", s.porous_l2(&sol.u1, &sol.v1)),
        ("flux_l2", s.gamma_cells_l2(&sol.flux)),
        ("line_velocity_l2", s.gamma_nodes_l2(&sol.line_velocity)),
        ("line_pressure_l2", s.gamma_cells_l2(&sol.line_pressure)),
    ];
    write_table(out, "limit_summary.csv", &["quantity", "value"], &kv(&rows))?;
    if dump {
        dump_limit(out, &sol)?;
    }
    Ok(())
}

pub fn sweep(c: &RunConfig, out: &Path) -> Result<()> {
    let report = run_sweep(&sweep_setup(c))?;
    let mut rows = Vec::new();
    for r in &report.rows {
        match &r.outcome {
            Ok(row) => rows.push(row.values().iter().map(|v| opt(*v)).collect()),
            Err(e) => {
                eprintln!("warning: sweep: epsilon {}: {e}", num(r.epsilon));
                let mut blank = vec![String::new(); COLUMNS.len()];
                blank[0] = num(r.epsilon);
                rows.push(blank);
            }
        }
    }
    write_table(out, "sweep.csv", &COLUMNS, &rows)?;
    let rates: Vec<Vec<String>> = report
        .rates
        .iter()
        .map(|(q, f)| vec![q.to_string(), opt(f.map(|f| f.rate)), opt(f.map(|f| f.r2))])
        .collect();
    write_table(out, "rates.csv", &["quantity", "rate", "r2"], &rates)
}

pub fn mms(case: &str, levels: &[usize], out: &Path) -> Result<()> {
    let c = ManufacturedCase::by_name(case)?;
    let r = mms_convergence(&c, levels, &SolverSettings::default())?;
    let mut rows = Vec::new();
    for row in &r.rows {
        for (field, e) in &row.errors {
            rows.push(vec![case.to_string(), row.level.to_string(), field.to_string(), num(*e)]);
        }
    }
    write_table(out, "mms.csv", &["case", "level", "field", "error"], &rows)?;
    let orders: Vec<Vec<String>> = r
        .orders
        .iter()
        .map(|(f, fit)| vec![case.to_string(), f.to_string(), opt(fit.map(|x| x.rate)), opt(fit.map(|x| x.r2))])
        .collect();
    write_table(out, "mms_rates.csv", &["case", "field", "order", "r2"], &orders)
}

pub fn infsup(problem: &str, levels: &[usize], eps: f64, dense_max: usize, out: &Path) -> Result<()> {
    let p = match problem {
        "eps" => Problem::Epsilon(eps),
        "limit" => Problem::Limit,
        other => bail!("unknown problem '{other}', expected eps or limit"),
    };
    if levels.is_empty() {
        bail!("no levels given");
    }
    let rows: Vec<Vec<String>> = infsup_study(p, levels, dense_max)?
        .into_iter()
        .map(|r| {
            vec![
                r.problem.to_string(),
                r.level.to_string(),
                num(r.constant),
                r.iterations.to_string(),
                opt(r.dense_constant),
            ]
        })
        .collect();
    write_table(out, "infsup.csv", &["problem", "level", "constant", "iterations", "dense_constant"], &rows)
}

pub fn output_dir(cli: Option<PathBuf>, c: Option<&RunConfig>) -> PathBuf {
    cli.or_else(|| c.map(|c| c.output_dir.clone())).unwrap_or_else(|| PathBuf::from("."))
}
