use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hdbool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdbool"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

// Parses `quantity,value` reports into (name, raw value) pairs.
fn report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_owned(), v.to_owned())
        })
        .collect()
}

fn get(rows: &[(String, String)], key: &str) -> f64 {
    rows.iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no {key}"))
        .1
        .parse()
        .unwrap()
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn col(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

const GAUSS: &str = r#"{"model": {"rho": -2.0, "radius_law": {"type": "gaussian_grain", "sigma": 1.0}},
 "scan": {"n_list": [50, 100, 200]},
 "mc": {"n": 4, "quantity": "coverage", "samples": 3000, "seed": 7}}"#;

const DET: &str = r#"{"model": {"rho": 0.0, "radius_law": {"type": "deterministic", "rstar": 1.0}},
 "scan": {"n_list": [2]}}"#;

#[test]
fn gaussian_thresholds_report_the_cubic_root() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.json", GAUSS);
    let o = hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.ends_with("# complete\n"));
    let rows = report(&text);
    let c = get(&rows, "gaussian_c");
    assert!(1.246_979_6 < c && c < 1.246_979_7, "{c}");
    assert!(rows
        .iter()
        .any(|(k, v)| k == "regime" && v == "percolating-zero-volume"));
}

#[test]
fn deterministic_thresholds_differ_by_ln2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.json", DET);
    let o = hdbool(&["thresholds", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gap = doc["tau_v_minus_tau_p_nats"].as_f64().unwrap();
    assert!((gap - std::f64::consts::LN_2).abs() < 1e-12);
    assert_eq!(doc["tau_p_minus_tau_d_nats"].as_f64().unwrap(), 0.0);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", r#"{"model": {"rho": -1.0}}"#);
    let out = dir.path().join("out.csv");
    for cmd in ["thresholds", "scan", "mc", "branching"] {
        let o = hdbool(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(o.stdout.is_empty());
        assert!(!out.exists());
    }
    let o = hdbool(&[
        "thresholds",
        "--config",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(&dir, "junk.json", "{not json");
    assert_eq!(
        hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let cfg = write_config(
        &dir,
        "extra.json",
        r#"{"model": {"rho": 0, "radius_law": {"type": "deterministic", "rstar": 1}, "colour": 1}}"#,
    );
    assert_eq!(
        hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn invalid_model_values_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "nonconvex.json",
        r#"{"model": {"rho": 0, "radius_law": {"type": "tabulated", "knots": [[0.5, 1.0], [1.0, 0.0], [1.5, 0.9], [2.0, 1.0]]}}}"#,
    );
    let o = hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("convex"));
    let cfg = write_config(
        &dir,
        "sigma.json",
        r#"{"model": {"rho": 0, "radius_law": {"type": "gaussian_grain", "sigma": -1}}}"#,
    );
    assert_eq!(
        hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn gaussian_scan_converges_toward_target() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.json", GAUSS);
    let o = hdbool(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.ends_with("# complete\n"));
    let (h, rows) = table(&text);
    assert_eq!(rows.len(), 3);
    let err: Vec<f64> = rows
        .iter()
        .map(|r| (col(&h, r, "exponent_vf") - col(&h, r, "target_vf")).abs())
        .collect();
    assert!(err[2] < err[1] && err[2] < err[0], "{err:?}");
}

#[test]
fn deterministic_scan_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.json", DET);
    let out = dir.path().join("scan.csv");
    let o = hdbool(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&fs::read_to_string(&out).unwrap());
    let pi = std::f64::consts::PI;
    assert!((col(&h, &rows[0], "log_lambda_n") - (2.0 * pi).ln()).abs() < 1e-14);
    assert!((col(&h, &rows[0], "log_mean_degree") - (8.0 * pi).ln()).abs() < 1e-14);
    assert!((col(&h, &rows[0], "coverage") - (1.0 - (-2.0 * pi).exp())).abs() < 1e-14);
}

#[test]
fn empty_dimension_list_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "e.json",
        r#"{"model": {"rho": 0, "radius_law": {"type": "deterministic", "rstar": 1}}, "scan": {"n_list": []}}"#,
    );
    let o = hdbool(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn failed_scan_lacks_terminator_and_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "q.json",
        r#"{"model": {"rho": -2.0, "radius_law": {"type": "gaussian_grain", "sigma": 1.0}},
            "quadrature": {"rel_tol": 1e-15, "max_subdivisions": 1}, "scan": {"n_list": [3, 500]}}"#,
    );
    let o = hdbool(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!stdout(&o).contains("# complete"));
}

#[test]
fn mc_output_is_reproducible_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.json", GAUSS);
    let run = |name: &str, extra: &[&str]| -> String {
        let out = dir.path().join(name);
        let mut args = vec!["mc", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = hdbool(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", &[]);
    let b = run("b.csv", &[]);
    let c = run("c.csv", &["--jobs", "3"]);
    let d = run("d.csv", &["--jobs", "1"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a, d);
    let e = run("e.csv", &["--seed", "8"]);
    assert_ne!(a, e);
    let rows = report(&a);
    let z = get(&rows, "z_score");
    assert!(z.abs() < 4.0, "{z}");
    assert!(rows.iter().any(|(k, v)| k == "generator" && v.contains("ChaCha8")));
}

#[test]
fn branching_survival_increases_above_tau_d() {
    let dir = TempDir::new().unwrap();
    // tau_d for R* = 1 is -ln(2 pi e)/2 - ln 2
    let tau_d = -0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() - std::f64::consts::LN_2;
    let body = format!(
        r#"{{"model": {{"rho": {}, "radius_law": {{"type": "deterministic", "rstar": 1.0}}}}, "branching": {{"n_list": [5, 10, 20, 40]}}}}"#,
        tau_d + 0.2
    );
    let cfg = write_config(&dir, "b.json", &body);
    let o = hdbool(&["branching", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&stdout(&o));
    let s: Vec<f64> = rows.iter().map(|r| col(&h, r, "survival")).collect();
    assert!(s.windows(2).all(|w| w[1] >= w[0]) && s[3] > s[0], "{s:?}");
}

#[test]
fn gaussian_report_constants() {
    let o = hdbool(&["gaussian-report", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let f = |k: &str| doc[k].as_f64().unwrap();
    let half_ln_2pie = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    assert!((f("r_v") - 2f64.sqrt()).abs() < 1e-12);
    assert!((f("r_d") - 1.5f64.sqrt()).abs() < 1e-12);
    assert!((f("tau_v_nats") - (-half_ln_2pie - 0.5 * (4f64.ln() - 1.0))).abs() < 1e-12);
    assert!((f("tau_d_nats") - (-half_ln_2pie - 0.5 * (13.5f64.ln() - 1.0))).abs() < 1e-12);
    assert!((f("tau_v_minus_truncated_tau_v_nats") + 0.5 * (4f64.ln() - 1.0)).abs() < 1e-12);
    assert_eq!(doc["gaussian_tau_v_below_truncated"], true);
    let c = f("c");
    assert!(1.246_979_6 < c && c < 1.246_979_7);
}

#[test]
fn tabulated_law_from_csv_file() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("rate.csv"),
        "r,rate\n0.5,0.5\n1.0,0.0\n2.0,1.0\n4.0,4.0\n",
    )
    .unwrap();
    let cfg = write_config(
        &dir,
        "t.json",
        r#"{"model": {"rho": -2, "radius_law": {"type": "tabulated", "path": "rate.csv"}}}"#,
    );
    let o = hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = report(&stdout(&o));
    assert!(get(&rows, "tau_d_nats") <= get(&rows, "tau_p_nats"));
    assert!(get(&rows, "tau_p_nats") <= get(&rows, "tau_v_nats"));
}

#[test]
fn log_mgf_family_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "m.json",
        r#"{"model": {"rho": -2, "radius_law": {"type": "log_mgf", "family": "gamma", "shape": 4.0, "scale": 0.25}},
            "scan": {"n_list": [5, 10]}}"#,
    );
    for cmd in ["thresholds", "scan"] {
        let o = hdbool(&[cmd, "--config", cfg.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let cfg = write_config(
        &dir,
        "u.json",
        r#"{"model": {"rho": -2, "radius_law": {"type": "log_mgf", "family": "cauchy"}}}"#,
    );
    assert_eq!(
        hdbool(&["thresholds", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn jobs_zero_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.json", DET);
    assert_eq!(
        hdbool(&["scan", "--config", cfg.to_str().unwrap(), "--jobs", "0"])
            .status
            .code(),
        Some(2)
    );
}
