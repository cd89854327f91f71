use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hoa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoa"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn ci_rows(text: &str) -> Vec<(f64, f64)> {
    rows(text)[1..].iter().map(|r| (r[2].parse().unwrap(), r[3].parse().unwrap())).collect()
}

const GAMMA: [&str; 4] = ["--model", "gamma_ratio", "--hyper", "s=1.6,a=3"];

#[test]
fn fit_reports_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pair.json"), "[1, 2]").unwrap();
    let o = hoa(&["fit", "--model", "exp_pair", "--data", "pair.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let th: Vec<f64> = serde_json::from_value(v["theta_hat"].clone()).unwrap();
    assert!((th[0] - 2.0).abs() < 1e-10 && (th[1] - 0.5).abs() < 1e-10);
}

#[test]
fn model_document_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.json"), r#"{"id": "exp_pair", "hyper": {}, "data": [1, 2]}"#).unwrap();
    let o = hoa(&["fit", "--model", "m.json", "--format", "csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["parameter", "estimate", "standard_error"]);
    assert!((r[1][1].parse::<f64>().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn signif_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["signif"];
    args.extend(GAMMA);
    args.extend(["--psi-grid", "0.6:4.0:41", "--out", "curve.csv"]);
    let o = hoa(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let r = rows(&text);
    assert_eq!(
        r[0],
        ["psi", "r", "q", "rstar", "phi_r", "phi_rstar", "lugannani_rice", "interpolated", "accuracy_order"]
    );
    assert_eq!(r.len(), 42);
    assert!(r[1..].iter().all(|row| row[8] == "3"));
    let digits = r[1][0].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(digits.len(), 17);
}

#[test]
fn signif_matches_reference_values_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["signif"];
    args.extend(GAMMA);
    args.extend(["--psi-grid", "0.6:4.0:35"]);
    let o = hoa(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    let row = r[1..].iter().find(|row| (row[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12).unwrap();
    let val = |i: usize| row[i].parse::<f64>().unwrap();
    assert!((val(1) - 1.16189500386222507).abs() < 1e-8);
    assert!((val(2) - 1.19412624960679932).abs() < 1e-8);
    assert!((val(3) - 1.18544485109770544).abs() < 1e-8);
    assert!((val(5) - 0.88207919634184939).abs() < 1e-9);
    assert!((val(6) - 0.88207962948541067).abs() < 1e-9);
}

#[test]
fn ci_prints_two_different_intervals() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pair.json"), "[1, 2]").unwrap();
    let o = hoa(&["ci", "--model", "exp_pair", "--data", "pair.json", "--level", "0.95"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("phi_r,") && text.contains("phi_rstar,"));
    let iv = ci_rows(&text);
    assert_eq!(iv.len(), 2);
    assert!((iv[0].0 - iv[1].0).abs() > 1e-3 && (iv[0].1 - iv[1].1).abs() > 1e-3);
    assert!(iv.iter().all(|&(lo, hi)| 0.0 < lo && lo < 2.0 && 2.0 < hi));
}

#[test]
fn curve_round_trip_reproduces_the_interval() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["signif"];
    args.extend(GAMMA);
    args.extend(["--psi-grid", "0.4:5.0:41", "--out", "curve.csv"]);
    assert!(hoa(&args, dir.path()).status.success());
    let mut direct = vec!["ci"];
    direct.extend(GAMMA);
    let want = ci_rows(&stdout(&hoa(&direct, dir.path())));
    let reread = ci_rows(&stdout(&hoa(&["ci", "--curve", "curve.csv"], dir.path())));
    let mut resolved = vec!["ci", "--curve", "curve.csv"];
    resolved.extend(GAMMA);
    let resolved = ci_rows(&stdout(&hoa(&resolved, dir.path())));
    for got in [reread, resolved] {
        for (a, b) in got.iter().zip(&want) {
            assert!((a.0 - b.0).abs() < 1e-4 && (a.1 - b.1).abs() < 1e-4, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn coverage_json_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "coverage", "--model", "exp_mean", "--hyper", "n=5", "--true-theta", "1", "--replicates", "400", "--seed", "9",
    ];
    let a = hoa(&[&args[..], &["--out", "a.json", "--pvalues", "p.csv"]].concat(), dir.path());
    let b = Command::new(env!("CARGO_BIN_EXE_hoa"))
        .args(args)
        .args(["--out", "b.json"])
        .env("HOA_WORKERS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success(), "{}", stderr(&a));
    let ja = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(ja, fs::read(dir.path().join("b.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["replicates"], 400);
    assert_eq!(v["methods"].as_array().unwrap().len(), 4);
    let p = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(p.lines().count(), 401);
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], i32); 6] = [
        (&["fit", "--model", "no_such_model"], 2),
        (&["fit", "--model", "exp_pair", "--data", "missing.json"], 2),
        (&["signif", "--model", "gamma_ratio", "--hyper", "s=1.6,a=3", "--psi-grid", "1:2:3"], 2),
        (&["coverage", "--model", "exp_mean", "--hyper", "n=5", "--true-theta", "1", "--replicates", "0"], 2),
        (&["frobnicate"], 2),
        (&["ci", "--model", "gamma_ratio", "--hyper", "s=1.6,a=3", "--psi-grid", "1.4:1.8:9"], 3),
    ];
    for (args, code) in cases {
        let o = hoa(args, dir.path());
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
        if code == 3 || args[0] != "frobnicate" {
            let err = stderr(&o);
            assert_eq!(err.trim_end().lines().count(), 1, "{err}");
            assert!(err.starts_with("error: "));
        }
    }
    fs::write(dir.path().join("bad.json"), "{not json").unwrap();
    let o = hoa(&["fit", "--model", "exp_pair", "--data", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not valid JSON"));
}
