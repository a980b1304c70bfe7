use std::process::{Command, Output};

fn xyecho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyecho"))
        .env_remove("ECHO_THREADS")
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn le_csv_to_stdout() {
    let out = xyecho(&[
        "le",
        "--lambda",
        "1.0",
        "--n-sites",
        "10",
        "--time",
        "0,1,0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines[0],
        "experiment,gamma,lambda,n_sites,delta,mu,nu,g,t,value,flag"
    );
    assert!(lines[1].ends_with(",0.0000000000000000e0,1.0000000000000000e0,"));
}

#[test]
fn odd_n_is_a_config_error() {
    let out = xyecho(&["le", "--n-sites", "101"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_sites must be even"));
}

#[test]
fn unknown_flag_and_missing_file_are_config_errors() {
    assert_eq!(xyecho(&["le", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        xyecho(&["run", "/nonexistent/config.toml"]).status.code(),
        Some(1)
    );
    assert_eq!(xyecho(&["--help"]).status.code(), Some(0));
}

#[test]
fn unbracketed_peak_is_a_numerical_error() {
    let out = xyecho(&[
        "scaling",
        "--bracket",
        "1.2,1.5",
        "--n-sites",
        "11,21,31,41",
        "--lambda",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_sites=11"));
}

#[test]
fn json_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.json");
    let out = xyecho(&[
        "oracle",
        "--samples",
        "4",
        "--seed",
        "3",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4]["flag"], "q=max_abs_diff");
    assert!(rows[4]["value"].as_f64().unwrap() < 1e-9);
}

#[test]
fn run_config_file_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "experiment = \"le_time_gammas\"\n[chain]\nn_sites = 20\n[central_spin]\ndelta = 0.05\ng = 0.5\n[grid]\ntime = [0.0, 0.1, 0.1]\n",
    )
    .unwrap();
    let out = xyecho(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: both delta"));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().count(),
        1 + 6 * 2
    );
}

#[test]
fn echo_threads_overrides_flag() {
    let out = Command::new(env!("CARGO_BIN_EXE_xyecho"))
        .env("ECHO_THREADS", "many")
        .args(["oracle", "--samples", "1", "--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ECHO_THREADS"));

    let base = xyecho(&["berry", "--lambda", "0.5,1.5,0.1", "--n-sites", "10,11"]);
    let env = Command::new(env!("CARGO_BIN_EXE_xyecho"))
        .env("ECHO_THREADS", "3")
        .args([
            "berry",
            "--lambda",
            "0.5,1.5,0.1",
            "--n-sites",
            "10,11",
            "--threads",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(base.stdout, env.stdout);
}
