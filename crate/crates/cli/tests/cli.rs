use std::path::PathBuf;
use std::process::{Command, Output};

use ucit_core::{run_test, Decision, Method, TestPlan, TestResult};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn ucit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucit"))
        .args(args)
        .env("RUST_LOG", "off")
        .env_remove("UCIT_WORKERS")
        .output()
        .expect("spawn ucit")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn admissions() -> String {
    fixture("admissions.csv").to_str().unwrap().to_string()
}

#[test]
fn malformed_input_exits_2() {
    for name in [
        "bad_header.csv",
        "bad_value.csv",
        "ragged.csv",
        "zero_index.csv",
        "missing.csv",
    ] {
        let path = fixture(name);
        let out = ucit(&["test", "--input", path.to_str().unwrap(), "--seed", "1"]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn category_beyond_declared_size_exits_2() {
    let out = ucit(&["test", "--input", &admissions(), "--d", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 22") && msg.contains("z = 6"), "{msg}");
}

#[test]
fn configuration_errors_exit_3() {
    let input = admissions();
    let cases: Vec<Vec<&str>> = vec![
        vec!["test", "--input", &input, "--method", "hsic"],
        vec![
            "test",
            "--input",
            &input,
            "--method",
            "uci",
            "--calibration",
            "asymptotic",
        ],
        vec!["test", "--input", &input, "--B", "0"],
        vec!["test", "--input", &input, "--alpha", "1.5"],
        vec!["test", "--input", &input, "--workers", "0"],
        vec!["test", "--input", &input, "--format", "xml"],
        vec!["simulate", "--scenario", "9", "--n", "100"],
        vec!["simulate", "--scenario", "3", "--l1", "4", "--l2", "5", "--n", "100"],
        vec!["simulate", "--scenario", "4", "--l1", "3", "--l2", "3", "--n", "100"],
        vec!["simulate", "--scenario", "2", "--n", "100", "--reps", "0"],
        vec!["power-curve", "--scenario", "2", "--n", "100", "--methods", ""],
        vec!["test"],
    ];
    for args in cases {
        let out = ucit(&args);
        assert_eq!(
            out.status.code(),
            Some(3),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(ucit(&["--help"]).status.code(), Some(0));
}

#[test]
fn json_matches_library_and_round_trips() {
    let out = stdout(&ucit(&[
        "test",
        "--input",
        &admissions(),
        "--method",
        "wuci",
        "--B",
        "499",
        "--seed",
        "12",
    ]));
    let parsed: TestResult = serde_json::from_str(&out).unwrap();
    let data = ucit_cli::input::read_dataset(&fixture("admissions.csv"), None, None, None).unwrap();
    let mut expected = run_test(&data, &TestPlan::permutation(Method::Wuci, 499, 0.05, 12)).unwrap();
    expected.replicates.clear();
    assert_eq!(parsed, expected);
    assert_eq!(parsed.seed, 12);
    assert_eq!(parsed.b, 499);
    assert_eq!(parsed.decision, Decision::Reject);
}

#[test]
fn replicates_only_on_request() {
    let input = admissions();
    let plain: serde_json::Value =
        serde_json::from_str(&stdout(&ucit(&["test", "--input", &input, "--B", "99", "--seed", "1"]))).unwrap();
    assert!(plain.get("replicates").is_none());
    let full: serde_json::Value = serde_json::from_str(&stdout(&ucit(&[
        "test",
        "--input",
        &input,
        "--B",
        "99",
        "--seed",
        "1",
        "--replicates",
    ])))
    .unwrap();
    assert_eq!(full["replicates"].as_array().unwrap().len(), 99);
}

#[test]
fn seed_is_echoed_when_drawn() {
    let out = stdout(&ucit(&["test", "--input", &admissions(), "--B", "19"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let seed = v["seed"].as_u64().expect("seed in output");
    let again = stdout(&ucit(&[
        "test",
        "--input",
        &admissions(),
        "--B",
        "19",
        "--seed",
        &seed.to_string(),
    ]));
    assert_eq!(out, again);
}

/// Pearson χ² summed over departments, computed from the published 2×2 tables.
fn admissions_chi2() -> f64 {
    let depts = [
        (512.0, 825.0, 89.0, 108.0),
        (353.0, 560.0, 17.0, 25.0),
        (120.0, 325.0, 202.0, 593.0),
        (138.0, 417.0, 131.0, 375.0),
        (53.0, 191.0, 94.0, 393.0),
        (22.0, 373.0, 24.0, 341.0),
    ];
    depts
        .iter()
        .map(|&(ma, mt, fa, ft): &(f64, f64, f64, f64)| {
            let table = [[ma, mt - ma], [fa, ft - fa]];
            let n = mt + ft;
            let cols = [ma + fa, n - ma - fa];
            let rows = [mt, ft];
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let e = rows[i] * cols[j] / n;
                    s += (table[i][j] - e).powi(2) / e;
                }
            }
            s
        })
        .sum()
}

#[test]
fn admissions_golden() {
    let data = ucit_cli::input::read_dataset(&fixture("admissions.csv"), Some(2), Some(2), Some(6)).unwrap();
    assert_eq!(data.len(), 4526);
    let out = stdout(&ucit(&[
        "test",
        "--input",
        &admissions(),
        "--method",
        "chi2",
        "--calibration",
        "asymptotic",
        "--seed",
        "0",
    ]));
    let r: TestResult = serde_json::from_str(&out).unwrap();
    let expected = admissions_chi2();
    assert!(
        (r.statistic - expected).abs() <= 1e-6 * expected,
        "{} vs {expected}",
        r.statistic
    );
    assert_eq!(r.df, Some(6));
    assert!(r.p_value < 0.01);
}

#[test]
fn csv_output_and_crlf_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("crlf.csv");
    let body: String = std::iter::once("x,y,z\r\n".to_string())
        .chain((0..40).map(|i| format!("{},{},{}\r\n", i % 2 + 1, i % 2 + 1, i / 10 + 1)))
        .collect();
    std::fs::write(&path, body).unwrap();
    let out = stdout(&ucit(&[
        "test",
        "--input",
        path.to_str().unwrap(),
        "--seed",
        "4",
        "--format",
        "csv",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], ucit_cli::output::TEST_HEADER);
    assert!(lines[1].starts_with("uci,permutation,"), "{}", lines[1]);
    assert!(lines[1].contains(",reject,199,0.05,4,"), "{}", lines[1]);
}

#[test]
fn power_curve_rows_and_header() {
    let out = stdout(&ucit(&[
        "power-curve",
        "--scenario",
        "4",
        "--n",
        "50,100,200",
        "--methods",
        "uci,g",
        "--reps",
        "10",
        "--B",
        "19",
        "--seed",
        "3",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "scenario,method,n,B,alpha,reps,power,se,seed");
    assert_eq!(lines.len(), 7);
    let ns: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ns, ["50", "100", "200", "50", "100", "200"]);
    for l in &lines[1..] {
        let fields: Vec<&str> = l.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[8], "3");
        let power: f64 = fields[6].parse().unwrap();
        assert!((0.0..=1.0).contains(&power));
    }
}

#[test]
fn simulate_json_fields() {
    let out = stdout(&ucit(&[
        "simulate",
        "--scenario",
        "worst-case",
        "--n",
        "64",
        "--d",
        "32",
        "--method",
        "chi2",
        "--calibration",
        "asymptotic",
        "--reps",
        "50",
        "--seed",
        "2",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["scenario"], "worst-case");
    assert_eq!(v["reps"], 50);
    assert_eq!(v["seed"], 2);
    assert!(v["rejections"].as_u64().unwrap() <= 50);
}

#[test]
fn admissions_uci_rejects() {
    let out = stdout(&ucit(&[
        "test",
        "--input",
        &admissions(),
        "--method",
        "uci",
        "--B",
        "9999",
        "--alpha",
        "0.05",
        "--seed",
        "7",
    ]));
    let r: TestResult = serde_json::from_str(&out).unwrap();
    assert!((0.02..=0.07).contains(&r.p_value), "{}", r.p_value);
    assert_eq!(r.decision, Decision::Reject);
    assert!(r.skipped_bins.is_empty());
}
