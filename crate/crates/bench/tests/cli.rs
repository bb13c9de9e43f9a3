use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpc-bench")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn csv_header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

const FAST: &[&str] = &["--set", "n_list=4,8,16", "--set", "legendre_terms=200", "--set", "density_samples=500"];

#[test]
fn forward_self_check_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["forward", "--self-check", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("slope"));
    for name in ["solution.csv", "observations.csv", "self_check.csv"] {
        assert!(csv_header(&dir.path().join(name)).ends_with(",config_hash"), "{name}");
    }
}

#[test]
fn converge_writes_rates_with_exact_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["converge", "--out", dir.path().to_str().unwrap(), "--seed", "5"];
    args.extend_from_slice(FAST);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    let mut lines = rates.lines();
    assert_eq!(lines.next().unwrap(), "N,K_N,support_theta,err_Z,err_mean_L2,dropped_mass,wall_time,config_hash");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let hash = rows[0][7];
    assert_eq!(hash.len(), 16);
    assert!(rows.iter().all(|r| r.len() == 8 && r[7] == hash));
    assert!(!dir.path().join("sweep_j.csv").exists());
}

#[test]
fn seed_changes_config_hash() {
    let hash_for = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec!["converge", "--out", dir.path().to_str().unwrap(), "--seed", seed];
        args.extend_from_slice(FAST);
        assert_eq!(code(&run(&args)), 0);
        let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
        rates.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string()
    };
    assert_ne!(hash_for("1"), hash_for("2"));
}

#[test]
fn sweep_flag_writes_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["converge", "--sweep-J", "--out", dir.path().to_str().unwrap(), "--set", "sweep_j=1,2,4", "--set", "sweep_n=32"];
    args.extend_from_slice(FAST);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sweep_j.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn cost_compare_writes_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "cost-compare",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "m_list=100,400,1600",
        "--set",
        "mc_replicates=4",
    ];
    args.extend_from_slice(FAST);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("cost.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "method,work_units,error,config_hash");
    assert_eq!(text.lines().filter(|l| l.starts_with("mc,")).count(), 3);
    assert_eq!(text.lines().filter(|l| l.starts_with("gpc,")).count(), 3);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "n_dims = 2\nthis line has no equals sign\n").unwrap();
    assert_eq!(code(&run(&["converge", "--config", bad.to_str().unwrap()])), 2);

    let unknown = dir.path().join("unknown.cfg");
    fs::write(&unknown, "no_such_key = 3\n").unwrap();
    assert_eq!(code(&run(&["forward", "--config", unknown.to_str().unwrap()])), 2);

    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&run(&["forward", "--config", missing.to_str().unwrap()])), 2);

    assert_eq!(code(&run(&["cost-compare", "--set", "m_list="])), 2);
    assert_eq!(code(&run(&["converge", "--set", "n_list=16,8"])), 2);
    assert_eq!(code(&run(&["converge", "--set", "kappa=1.5"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["forward", "--bogus"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn numeric_failure_exits_with_one() {
    // A tiny budget with very informative data makes the truncated normalization non-positive.
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "converge",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "n_dims=2",
        "--set",
        "gamma=1e-6",
        "--set",
        "n_list=2,4",
        "--set",
        "legendre_terms=50",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numeric"));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("results");
    fs::write(&cfg, format!("# small run\nJ = 2\nn_list = 4, 8, 16\nlegendre_terms = 100\nout_dir = {}\n", out_dir.display())).unwrap();
    let out = run(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("rates.csv").exists());
}
