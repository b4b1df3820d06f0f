use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn scce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scce_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scce"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn generated_panel(dir: &Path, name: &str, n: usize, t: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = scce(&[
        "generate",
        "--dgp",
        "e1",
        "--n",
        &n.to_string(),
        "--t",
        &t.to_string(),
        "--seed",
        &seed.to_string(),
        "--output",
        path.to_str().unwrap(),
    ]);
    stdout(&out);
    path
}

#[test]
fn simulate_csv_has_one_row_per_coefficient() {
    let out = scce(&[
        "simulate", "--dgp", "e1", "--n", "20", "--t", "20", "--reps", "50", "--seed", "1",
        "--format", "csv",
    ]);
    let text = stdout(&out);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["n", "t", "dgp", "estimator", "coef", "abs_bias", "rmse", "reps", "skipped"]
    );
    let records: Vec<_> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 2);
    for r in &records {
        let abs_bias: f64 = r[5].parse().unwrap();
        let rmse: f64 = r[6].parse().unwrap();
        assert!(rmse >= abs_bias);
        assert_eq!(&r[7], "50");
    }
}

#[test]
fn simulate_grid_is_cartesian() {
    let out = scce(&[
        "simulate", "--dgp", "e1", "--n", "10,15", "--t", "15,20", "--reps", "5", "--method",
        "ccep",
    ]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 4);
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn missing_cell_is_reported_by_unit_and_time() {
    let dir = TempDir::new().unwrap();
    let full = generated_panel(dir.path(), "full.csv", 10, 20, 4);
    let text = std::fs::read_to_string(&full).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .filter(|line| !line.starts_with("3,7,"))
        .collect();
    let holed = dir.path().join("holed.csv");
    std::fs::write(&holed, kept.join("\n") + "\n").unwrap();

    let out = scce(&["estimate", "--input", holed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unit 3") && err.contains("time 7"), "{err}");
}

#[test]
fn differenced_bootstrap_intervals_bracket_the_estimate() {
    let dir = TempDir::new().unwrap();
    let mut inside = 0;
    let mut total = 0;
    for seed in 0..5u64 {
        let panel = generated_panel(dir.path(), &format!("p{seed}.csv"), 30, 40, seed);
        let out = scce(&[
            "estimate",
            "--input",
            panel.to_str().unwrap(),
            "--diff",
            "--bootstrap",
            "99",
            "--seed",
            &seed.to_string(),
        ]);
        let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(report["differenced"], true);
        assert_eq!(report["n_periods"], 39);
        for c in report["coefficients"].as_array().unwrap() {
            let lo = c["ci_lower"].as_f64().unwrap();
            let hi = c["ci_upper"].as_f64().unwrap();
            let est = c["estimate"].as_f64().unwrap();
            assert!(lo <= hi);
            total += 1;
            if lo <= est && est <= hi {
                inside += 1;
            }
        }
    }
    assert!(inside as f64 >= 0.95 * total as f64, "{inside}/{total}");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let panel = generated_panel(dir.path(), "p.csv", 20, 30, 9);
    let again = generated_panel(dir.path(), "q.csv", 20, 30, 9);
    assert_eq!(std::fs::read(&panel).unwrap(), std::fs::read(&again).unwrap());

    let args = [
        "estimate",
        "--input",
        panel.to_str().unwrap(),
        "--bootstrap",
        "49",
        "--seed",
        "5",
    ];
    let a = stdout(&scce(&args));
    let b = stdout(&scce_env(&args, "SCCE_THREADS", "3"));
    assert_eq!(a, b);

    let sim = [
        "simulate", "--dgp", "e2", "--n", "15", "--t", "15", "--reps", "20", "--seed", "2",
    ];
    assert_eq!(stdout(&scce(&sim)), stdout(&scce_env(&sim, "SCCE_THREADS", "2")));
}

#[test]
fn knot_flags_are_ignored_with_warning_for_ccep() {
    let dir = TempDir::new().unwrap();
    let panel = generated_panel(dir.path(), "p.csv", 20, 30, 11);
    let path = panel.to_str().unwrap();
    let plain = scce(&["estimate", "--input", path, "--method", "ccep"]);
    let flagged = scce(&[
        "estimate", "--input", path, "--method", "ccep", "--knot-c", "3", "--basis", "hermite",
    ]);
    assert_eq!(stdout(&plain), stdout(&flagged));
    assert!(String::from_utf8_lossy(&flagged.stderr).contains("warning"));
    assert!(plain.stderr.is_empty());
}

#[test]
fn singular_design_exits_with_numerical_status() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("flat.csv");
    let mut text = String::from("unit,time,y,x1\n");
    for i in 0..8 {
        for t in 0..15 {
            text.push_str(&format!("{i},{t},{},2.0\n", ((i * 7 + t * 3) % 5) as f64));
        }
    }
    std::fs::write(&path, text).unwrap();
    let out = scce(&["estimate", "--input", path.to_str().unwrap(), "--method", "ccep"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn bad_thread_count_is_a_configuration_error() {
    let out = scce_env(
        &["simulate", "--dgp", "e1", "--n", "10", "--t", "10", "--reps", "2"],
        "SCCE_THREADS",
        "zero",
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SCCE_THREADS"));
}

#[test]
fn linearity_report_and_csv_output_file() {
    let dir = TempDir::new().unwrap();
    let panel = generated_panel(dir.path(), "p.csv", 20, 40, 12);
    let report_path = dir.path().join("lin.csv");
    let out = scce(&[
        "test-linearity",
        "--input",
        panel.to_str().unwrap(),
        "--format",
        "csv",
        "--output",
        report_path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&report_path).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let row = rows.records().next().unwrap().unwrap();
    let p: f64 = row[2].parse().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn invalid_options_exit_with_status_two() {
    let out = scce(&["simulate", "--dgp", "e1", "--n", "10", "--t", "10", "--pi", "1.5", "--errors", "correlated"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scce(&["estimate", "--input", "/nonexistent/panel.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
