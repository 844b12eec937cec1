use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cdwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdwork")).args(args).env_remove("CDWORK_WORKERS").output().unwrap()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, String) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    full.extend(["--out", &out_str]);
    let o = cdwork(&full);
    let text = fs::read_to_string(&out).unwrap_or_default();
    (o, text)
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| if c.is_empty() { f64::NAN } else { c.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn lz_dist_defaults() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "lz.csv", &["lz-dist"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv.starts_with("t,W,p\n0,0,1\n"));
    assert!(!csv.contains('\r'));

    // two-outcome distribution at the midpoint, against the closed form
    let mid: Vec<Vec<f64>> = rows(&csv).into_iter().filter(|r| r[0] == 0.5).collect();
    assert_eq!(mid.len(), 2);
    assert!((mid[0][1] - -14.995316).abs() < 1e-5 && (mid[0][2] - 0.5062495).abs() < 1e-6);
    assert!((mid[1][1] - 25.007809).abs() < 1e-5);
}

#[test]
fn invalid_duration_exits_2_naming_field() {
    let o = cdwork(&["lz-dist", "--tau-q", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau_q"));
    assert_eq!(cdwork(&["lz-dist", "--model", "ising"]).status.code(), Some(2));
    assert_eq!(cdwork(&["lz-dist", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn kz_scaling_needs_five_durations() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_to(dir.path(), "kz.csv", &["kz-scaling", "--tau-list", "0.1,0.2,0.4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("kz.csv").exists());
}

#[test]
fn kz_scaling_summary_and_widths() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "kz.csv", &["kz-scaling", "--tau-count", "6", "--grid-points", "801"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let last = stdout.lines().last().unwrap();
    let exponent: f64 = last.strip_prefix("exponent=").unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((exponent - 2.0 / 3.0).abs() < 0.07, "{last}");
    assert!(csv.starts_with("tau_q,t_star,t_c,width\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 6);
    assert!(r.iter().all(|row| row[3] > 0.0));
}

#[test]
fn entropy_map_bounds_and_impulse_lines() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(
        dir.path(),
        "em.csv",
        &["entropy-map", "--tau-list", "0.05,1,5", "--kz-lines", "--alpha", "1"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv.starts_with("tau_q,t,h_w,t_hat_minus,t_hat_plus\n"));
    let r = rows(&csv);
    assert!(r.iter().all(|row| row[2] >= 0.0 && row[2] <= 2f64.ln() + 1e-12));
    assert!(r.iter().any(|row| row[0] == 0.05 && (row[2] - 2f64.ln()).abs() < 1e-3));

    // emitted crossover times satisfy gap * |t - t_c| = alpha
    let row = r.iter().find(|row| row[0] == 5.0).unwrap();
    let (tau, delta, alpha) = (5.0, 0.5, 1.0);
    for t_hat in [row[3], row[4]] {
        let g = -10.0 + 20.0 * t_hat / tau;
        let residual = (delta * delta + g * g).sqrt() * (t_hat - tau / 2.0).abs() - alpha;
        assert!(residual.abs() < 1e-6, "residual {residual}");
    }
    // fast ramp: no root, empty cells
    assert!(csv.lines().any(|l| l.starts_with("0.05,") && l.ends_with(",,")));
}

#[test]
fn compare_mean_work_columns_agree() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "cmp.csv", &["compare", "--model", "lmg", "--length-list", "4,8,16"]);
    assert!(o.status.success());
    assert!(csv.starts_with("axis_value,t,h_w_full,h_w_restricted,mean_w,adiabatic_w\n"));
    let r = rows(&csv);
    assert!(r.iter().all(|row| (row[4] - row[5]).abs() <= 1e-8 * (1.0 + row[5].abs())));
    let max_full = |l: f64| r.iter().filter(|row| row[0] == l).map(|row| row[2]).fold(0.0, f64::max);
    assert!(max_full(4.0) <= max_full(8.0) && max_full(8.0) <= max_full(16.0));

    assert_eq!(cdwork(&["compare", "--model", "lz"]).status.code(), Some(2));
}

#[test]
fn slow_ising_quench_has_vanishing_entropy() {
    let dir = TempDir::new().unwrap();
    let (o, csv) = run_to(dir.path(), "cmp.csv", &["compare", "--model", "ising", "--tau-list", "200"]);
    assert!(o.status.success());
    assert!(rows(&csv).iter().all(|row| row[2] < 1e-3 && row[3] < 1e-3));
}

#[test]
fn output_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let args = ["compare", "--model", "ising", "--tau-list", "0.1,0.3,1", "--length", "4"];
    let mut outputs = Vec::new();
    for w in ["1", "2", "5"] {
        let mut a = args.to_vec();
        a.extend(["--workers", w]);
        let (o, csv) = run_to(dir.path(), &format!("w{w}.csv"), &a);
        assert!(o.status.success());
        outputs.push(csv);
    }
    assert!(outputs.windows(2).all(|p| p[0] == p[1]));

    let env_run = Command::new(env!("CARGO_BIN_EXE_cdwork"))
        .args(args)
        .env("CDWORK_WORKERS", "3")
        .output()
        .unwrap();
    assert!(env_run.status.success());
    assert_eq!(String::from_utf8(env_run.stdout).unwrap(), outputs[0]);

    let bad = Command::new(env!("CARGO_BIN_EXE_cdwork")).args(args).env("CDWORK_WORKERS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn json_config_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"command": "lz-dist", "tau_q": 2.0, "grid_points": 5, "delta": 0.5}"#).unwrap();
    let cfg_str = cfg.to_str().unwrap();
    let (o, csv) = run_to(dir.path(), "a.csv", &["lz-dist", "--config", cfg_str]);
    assert!(o.status.success());
    let times: Vec<f64> = rows(&csv).iter().map(|r| r[0]).collect();
    assert_eq!(*times.last().unwrap(), 2.0);

    let (o, csv) = run_to(dir.path(), "b.csv", &["lz-dist", "--config", cfg_str, "--tau-q", "3"]);
    assert!(o.status.success());
    assert_eq!(rows(&csv).last().unwrap()[0], 3.0);

    fs::write(&cfg, r#"{"tau": 1}"#).unwrap();
    assert_eq!(cdwork(&["lz-dist", "--config", cfg_str]).status.code(), Some(2));
    assert_eq!(cdwork(&["compare", "--config", "/nonexistent/run.json"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_without_partial_file() {
    // a ramp with no crossing makes the crossover search fail mid-run
    let dir = TempDir::new().unwrap();
    let (o, _) = run_to(
        dir.path(),
        "kz.csv",
        &["kz-scaling", "--g0", "-10", "--gd", "5", "--tau-count", "5"],
    );
    assert!(matches!(o.status.code(), Some(2) | Some(3)));
    assert!(!dir.path().join("kz.csv").exists());

    let (o, _) = run_to(dir.path(), "deg.csv", &["compare", "--model", "ising", "--tau-list", "1", "--gap-tol", "5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("deg.csv").exists());
}
