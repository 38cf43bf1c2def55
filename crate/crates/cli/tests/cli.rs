use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conetorsion")).args(args).output().expect("spawn")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn write_config(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("conetorsion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn torsion_unit_square() {
    let v = json(&run(&["torsion"]));
    let res = v["res"].as_f64().unwrap();
    assert!((res - 1.0 / (16.0 * std::f64::consts::PI)).abs() < 1e-12);
    let top = v["top"].as_f64().unwrap();
    assert!((top + 0.5 * 3f64.ln()).abs() < 1e-14);
    let sum = top + v["tors"].as_f64().unwrap() + res;
    assert!((sum - v["log_T"].as_f64().unwrap()).abs() < 1e-15);
    assert!(v["provenance"]["wall_time_s"].is_null());
}

#[test]
fn output_is_deterministic() {
    let a = run(&["torsion"]);
    let b = run(&["torsion"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn timing_flag_records_wall_time() {
    let v = json(&run(&["--timing", "torsion"]));
    assert!(v["provenance"]["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn cutoff_and_tolerance_together_exit_2() {
    let out = run(&["--cutoff", "50", "--tolerance", "1e-10", "torsion"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_path_errors_exit_2() {
    let p = write_config(
        "bad.json",
        r#"{"schema":1,"cross_section":{"family":"flat_torus","dim_n":2,"lattice_basis":[[1,0],[0,"x"]]}}"#,
    );
    let out = run(&["--config", p.to_str().unwrap(), "torsion"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cross_section.lattice_basis[1][1]"), "{err}");

    let odd = write_config(
        "odd.json",
        r#"{"schema":1,"cross_section":{"family":"flat_torus","dim_n":3,"lattice_basis":[[1,0,0],[0,1,0],[0,0,1]]}}"#,
    );
    assert_eq!(run(&["--config", odd.to_str().unwrap(), "torsion"]).status.code(), Some(2));
}

#[test]
fn sphere_is_experimental() {
    let p =
        write_config("sphere.json", r#"{"schema":1,"cross_section":{"family":"round_sphere","dim_n":2,"radius":1.0}}"#);
    assert_eq!(run(&["--config", p.to_str().unwrap(), "torsion"]).status.code(), Some(2));
}

#[test]
fn bad_mu_grid_exit_2() {
    assert_eq!(run(&["--mu", "1..8", "scaling"]).status.code(), Some(2));
    assert_eq!(run(&["--mu", "abc", "scaling"]).status.code(), Some(2));
}

#[test]
fn scaling_csv() {
    let out = run(&["--mu", "2,4,8", "scaling"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "mu,tors,abs_tors_mu_over_log_mu");
    assert_eq!(lines.len(), 4);
    let ratios: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn truncated_difference_consistent() {
    let v = json(&run(&["--epsilon", "0.25", "truncated"]));
    assert!(v["consistency_residual"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn anomaly_matches_closed_form() {
    let v = json(&run(&["anomaly"]));
    assert!(v["relative_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn verify_passes() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("conetorsion-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("olver.json");
    let out = run(&["--out", p.to_str().unwrap(), "dump-olver", "--max-order", "3"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert!(v.is_array());
}

#[test]
fn unwritable_output_exit_2() {
    let out = run(&["--out", "/nonexistent-dir/x/report.json", "torsion"]);
    assert_eq!(out.status.code(), Some(2));
}
