use std::path::Path;
use std::process::{Command, Output};

use dirac_core::geometry::{FourierShape, ShapeRecord};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-spectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.json");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"solver": {"N": 50, "nodes": 3}}"#);
    let out = run(&["--config", &cfg, "bounds", "--a", "1", "--b", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown field"), "{err}");
}

#[test]
fn windows_at_or_below_the_mass_are_rejected() {
    let out = run(&["--window", "1.0,4.0", "validate-disk", "--n", "40", "--mass", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not above the mass"));
}

#[test]
fn bounds_table_is_ordered() {
    let text = stdout(&run(&["bounds", "--a", "2", "--b", "0.5", "--mass", "1"]));
    let (headers, rows) = read_csv(&text);
    assert_eq!(headers[0], "a");
    assert_eq!(rows.len(), 1);
    let value = |name: &str| -> f64 {
        let i = headers.iter().position(|h| h == name).unwrap();
        rows[0][i].parse().unwrap()
    };
    assert_eq!(value("a"), 2.0);
    let (lo, hi) = (value("lambda_1_lower"), value("lambda_1_upper"));
    assert!(1.0 < lo && lo <= hi, "{lo} {hi}");
    assert!(value("upper_refined_sq") <= value("upper_simple_sq"));
}

#[test]
fn validate_disk_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disk.json");
    let out = run(&[
        "--eta",
        "0.15",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
        "validate-disk",
        "--n",
        "60,80",
    ]);
    stdout(&out);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let lambda = row["lambda_1"].as_f64().unwrap();
        assert!((lambda - 1.434695650819563).abs() < 1e-6, "{row}");
        assert!(row["abs_error"].as_f64().unwrap() < 1e-6);
    }
}

#[test]
fn csv_numbers_use_fifteen_significant_digits() {
    let text = stdout(&run(&["--eta", "0.15", "validate-disk", "--n", "80"]));
    let (headers, rows) = read_csv(&text);
    assert_eq!(headers, ["N", "lambda_1", "abs_error"]);
    let lambda = &rows[0][1];
    let digits = lambda.chars().filter(char::is_ascii_digit).count();
    assert!(digits <= 15, "{lambda}");
    assert!(lambda.starts_with("1.4346956"), "{lambda}");
}

#[test]
fn eigenfunction_grid_stays_inside_the_disk() {
    let text = stdout(&run(&["--sources", "80", "--eta", "0.1", "eigenfunction", "--grid", "9"]));
    let (headers, rows) = read_csv(&text);
    assert_eq!(headers, ["x", "y", "abs_u1", "abs_u2"]);
    assert!(!rows.is_empty() && rows.len() < 81);
    let r = (1.0 / std::f64::consts::PI).sqrt();
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert!(v[0].hypot(v[1]) < r);
        assert!(v[2].is_finite() && v[3].is_finite());
    }
}

#[test]
fn optimize_streams_a_monotone_trace() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.json");
    let shape = FourierShape::new(1.0, vec![0.0, 0.1], vec![0.0, 0.0]).unwrap();
    std::fs::write(&init, serde_json::to_string(&ShapeRecord::from_fourier(&shape)).unwrap()).unwrap();
    let final_shape = dir.path().join("final.json");
    let out = run(&[
        "optimize",
        "--objective",
        "min-lambda1",
        "--modes",
        "2",
        "--iterations",
        "3",
        "--inner-sources",
        "60",
        "--init",
        init.to_str().unwrap(),
        "--shape-out",
        final_shape.to_str().unwrap(),
    ]);
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["best_value"].as_f64().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
    assert!(values[0] > 3.1 && values[0] < 3.3, "{values:?}");
    let record: ShapeRecord = serde_json::from_str(&std::fs::read_to_string(&final_shape).unwrap()).unwrap();
    assert_eq!(record.kind, "fourier");
    assert!((record.area - 1.0).abs() < 1e-9);
    let summary: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(summary["final_value"].as_f64().is_some());
}
