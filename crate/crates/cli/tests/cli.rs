use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracflow"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path, extra: &str) -> String {
    let text = format!("resolution.nx = 8\nresolution.ny = 8\nresolution.nz = 8\nsweep.epsilons = 0.5, 0.25, 0.125\noutput.dir = out\n{extra}");
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn sweep_writes_reports_deterministically() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path(), "");
    assert!(bin(&["sweep", "--config", &cfg], t.path()).status.success());
    let out = t.path().join("out");
    let sweep = read(&out, "sweep.csv");
    assert_eq!(
        sweep.lines().next().unwrap(),
        "epsilon,err_v1_hdiv,err_vT,err_dz_vT,err_vN_hdz,err_p1,err_p2,energy_residual,apriori_E,ratio_T_N,vanish_dzvT,vanish_gradT_epsvN"
    );
    assert_eq!(sweep.lines().count(), 4);
    let rates = read(&out, "rates.csv");
    assert_eq!(rates.lines().next().unwrap(), "quantity,rate,r2");
    assert!(rates.lines().any(|l| l.starts_with("err_vT,")));
    assert!(!rates.contains("energy_residual"));

    assert!(bin(&["sweep", "--config", &cfg, "--out", "again"], t.path()).status.success());
    let again = t.path().join("again");
    assert_eq!(fs::read(out.join("sweep.csv")).unwrap(), fs::read(again.join("sweep.csv")).unwrap());
    assert_eq!(fs::read(out.join("rates.csv")).unwrap(), fs::read(again.join("rates.csv")).unwrap());
}

#[test]
fn solve_limit_dumps_fields() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path(), "");
    let o = bin(&["solve-limit", "--config", &cfg, "--dump-fields"], t.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = t.path().join("out");
    for f in ["limit_summary.csv", "p1.csv", "p2.csv", "v1_x.csv", "v1_y.csv", "vT2.csv", "xi.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(read(&out, "p1.csv").lines().next().unwrap(), "x,y,value");
    assert_eq!(read(&out, "p2.csv").lines().next().unwrap(), "x,value");
    assert_eq!(read(&out, "vT2.csv").lines().count(), 1 + 9);
    assert_eq!(read(&out, "xi.csv").lines().next().unwrap(), "x,z,value");
}

#[test]
fn solve_eps_summary_and_fields() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path(), "output.dump_fields = true\n");
    let o = bin(&["solve-eps", "--config", &cfg, "--epsilon", "0.25"], t.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = t.path().join("out");
    let summary = read(&out, "eps_summary.csv");
    let energy: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("energy_residual,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(energy <= 1e-10);
    for f in ["p1.csv", "p2.csv", "v1_x.csv", "v1_y.csv", "vT2.csv", "vN2.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(read(&out, "vN2.csv").lines().count(), 1 + 8 * 9);
}

#[test]
fn infsup_rows() {
    let t = tempfile::tempdir().unwrap();
    let o = bin(&["infsup", "--problem", "limit", "--levels", "4,6,8", "--dense-max", "6"], t.path());
    assert!(o.status.success());
    let csv = read(t.path(), "infsup.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "problem,level,constant,iterations,dense_constant");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].ends_with(','), "no dense value above the cap: {}", lines[3]);
}

#[test]
fn mms_reports_orders() {
    let t = tempfile::tempdir().unwrap();
    let o = bin(&["mms", "--case", "darcy-sine", "--levels", "4,8,16"], t.path());
    assert!(o.status.success());
    let rates = read(t.path(), "mms_rates.csv");
    let order: f64 = rates
        .lines()
        .find(|l| l.starts_with("darcy-sine,p1,"))
        .and_then(|l| l.split(',').nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(order >= 0.9);
    assert_eq!(read(t.path(), "mms.csv").lines().count(), 1 + 3 * 2);
}

#[test]
fn errors_are_one_line_with_context() {
    let t = tempfile::tempdir().unwrap();
    let p = t.path().join("bad.cfg");
    fs::write(&p, "resolution.nx = 8\ncoefficients.Q = 1, 0.5, 0, 1\n").unwrap();
    let o = bin(&["solve-eps", "--config", p.to_str().unwrap(), "--epsilon", "0.5"], t.path());
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: solve-eps: "));
    assert!(err.contains("coefficients.Q") && err.contains("line 2"));

    let o = bin(&["mms", "--case", "nope", "--levels", "4"], t.path());
    assert!(!o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: mms: "));

    let o = bin(&["infsup", "--problem", "stokes", "--levels", "4"], t.path());
    assert!(!o.status.success());

    let o = bin(&["sweep", "--config", "missing.cfg"], t.path());
    assert!(!o.status.success());
    assert_eq!(String::from_utf8(o.stderr).unwrap().lines().count(), 1);
}

#[test]
fn check_exit_status_matches_report() {
    let t = tempfile::tempdir().unwrap();
    let cfg = small_config(t.path(), "");
    let o = bin(&["check", "--config", &cfg], t.path());
    let csv = read(&t.path().join("out"), "check.csv");
    let all_pass = csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("true"));
    assert_eq!(o.status.success(), all_pass);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), csv.lines().count() - 1);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")));
    assert!(csv.contains("interface_shared,true"));
}

#[test]
fn in_process_entry_point() {
    assert_eq!(fracflow_cli::run_command(["fracflow", "--version"]), 0);
    assert_eq!(fracflow_cli::run_command(["fracflow", "solve-eps"]), 2);
}
