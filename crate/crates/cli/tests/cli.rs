use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use survscreen_cli::{cmd_screen, MethodChoice, QnChoice, Report, RunConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn survscreen(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_survscreen"));
    cmd.args(args).env_remove("SURVSCREEN_THREADS");
    if let Some(t) = threads {
        cmd.env("SURVSCREEN_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

/// Same keys and value types everywhere; numbers equal to 1e-12 relative.
fn assert_same_shape(got: &Value, want: &Value, path: &str) {
    match (got, want) {
        (Value::Object(g), Value::Object(w)) => {
            let gk: Vec<_> = g.keys().collect();
            let wk: Vec<_> = w.keys().collect();
            assert_eq!(gk, wk, "keys at {path}");
            for (k, v) in w {
                assert_same_shape(&g[k], v, &format!("{path}.{k}"));
            }
        }
        (Value::Array(g), Value::Array(w)) => {
            assert_eq!(g.len(), w.len(), "length at {path}");
            for (i, (a, b)) in g.iter().zip(w).enumerate() {
                assert_same_shape(a, b, &format!("{path}[{i}]"));
            }
        }
        (Value::Number(g), Value::Number(w)) => {
            let (a, b) = (g.as_f64().unwrap(), w.as_f64().unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{path}: {a} vs {b}");
        }
        (g, w) => assert_eq!(g, w, "at {path}"),
    }
}

const TOY_ARGS: [&str; 8] = ["--seed", "7", "--orderings", "3", "--qn", "5", "--alpha", "0.05"];

fn toy_args() -> Vec<String> {
    let mut args = vec!["screen".to_string(), data("toy.csv").display().to_string()];
    args.extend(TOY_ARGS.iter().map(|s| s.to_string()));
    args
}

#[test]
fn screen_report_matches_golden_file() {
    let args = toy_args();
    let out = survscreen(&args.iter().map(String::as_str).collect::<Vec<_>>(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got: Value = serde_json::from_slice(&out.stdout).unwrap();
    let want: Value = serde_json::from_str(&std::fs::read_to_string(data("toy_report.json")).unwrap()).unwrap();
    assert_same_shape(&got, &want, "$");
}

#[test]
fn report_round_trips_through_json() {
    let args = toy_args();
    let out = survscreen(&args.iter().map(String::as_str).collect::<Vec<_>>(), None);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap();
    assert_eq!(again.trim_end(), String::from_utf8(out.stdout).unwrap().trim_end());
    let min_p = report.orderings.iter().map(|o| o.p_value).fold(f64::INFINITY, f64::min);
    assert_eq!(report.p_value, min_p);
    assert_eq!(report.adjusted_p, (3.0 * min_p).min(1.0));
}

#[test]
fn output_is_byte_identical_across_thread_counts() {
    let args = toy_args();
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let one = survscreen(&args, Some("1"));
    let four = survscreen(&args, Some("4"));
    let default = survscreen(&args, None);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, default.stdout);
}

#[test]
fn flags_are_echoed_in_the_config() {
    let path = data("toy.csv");
    let out = survscreen(
        &[
            "screen",
            path.to_str().unwrap(),
            "--method",
            "stabilized",
            "--qn",
            "half",
            "--orderings",
            "2",
            "--alpha",
            "0.1",
            "--variant",
            "prefix",
            "--tau",
            "q:0.9",
            "--seed",
            "99",
            "--no-standardize",
        ],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let expected = RunConfig {
        method: MethodChoice::Stabilized,
        q_n: QnChoice::Half,
        orderings: 2,
        alpha: 0.1,
        variant: survscreen::stabilized::Variant::Prefix,
        tau_rule: survscreen::survival::TauRule::Quantile(0.9),
        standardize: false,
        seed: 99,
        threads: None,
    };
    assert_eq!(report.config, expected);
    assert_eq!(report.orderings.len(), 2);
    assert!(report.execution.is_none());
}

#[test]
fn seed_is_reported_when_generated() {
    let path = data("toy.csv");
    let out = survscreen(&["screen", path.to_str().unwrap(), "--timing"], None);
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    let seed = report.config.seed;
    let again = survscreen(&["screen", path.to_str().unwrap(), "--seed", &seed.to_string()], None);
    let replay: Report = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(replay.estimate, report.estimate);
    assert!(report.execution.is_some());
}

#[test]
fn uncensored_single_predictor_gives_least_squares() {
    let config = RunConfig {
        method: MethodChoice::Oracle { predictor: "x".into() },
        standardize: false,
        ..RunConfig::default()
    };
    let report = cmd_screen(&data("uncensored.csv"), &config, false).unwrap();
    let (u, t) = ([0.1, 0.7, -1.2, 1.9, 0.0], [0.3, 1.1, -0.5, 2.0, 0.9]);
    let ols = survscreen_reference::ols_slope(&u, &t);
    assert_eq!(format!("{:.10}", report.estimate), format!("{ols:.10}"));
    let bonferroni = cmd_screen(
        &data("uncensored.csv"),
        &RunConfig {
            method: MethodChoice::Bonferroni,
            standardize: false,
            ..RunConfig::default()
        },
        false,
    )
    .unwrap();
    assert_eq!(bonferroni.adjusted_p, bonferroni.p_value);
}

#[test]
fn malformed_status_exits_with_two_and_names_the_row() {
    let path = data("bad_status.csv");
    let out = survscreen(&["screen", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 2"), "{stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn numerical_degeneracy_exits_with_three() {
    let path = data("flat.csv");
    let out = survscreen(
        &["screen", path.to_str().unwrap(), "--method", "oracle", "--oracle-k", "flat", "--no-standardize"],
        None,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flat"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let path = data("toy.csv");
    let p = path.to_str().unwrap();
    for args in [
        vec!["screen", p, "--method", "oracle"],
        vec!["screen", p, "--method", "oracle", "--oracle-k", "missing"],
        vec!["screen", p, "--orderings", "0"],
        vec!["screen", p, "--qn", "12"],
        vec!["screen", p, "--tau", "q:2"],
        vec!["screen", "/nonexistent.csv"],
        vec!["simulate", "--model", "B2", "--reps", "1"],
    ] {
        let out = survscreen(&args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn simulate_emits_well_formed_csv() {
    for (model, censoring, method) in [
        ("N", "light", "stabilized-full,bonferroni"),
        ("A1", "heavy", "stabilized-prefix,oracle"),
        ("A2", "none", "stabilized-multi"),
    ] {
        let out = survscreen(
            &[
                "simulate", "--model", model, "--censoring", censoring, "--n", "40", "--p", "12",
                "--reps", "5", "--method", method, "--orderings", "2", "--seed", "3",
            ],
            None,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(
            reader.headers().unwrap().iter().collect::<Vec<_>>(),
            ["model", "error", "censoring", "n", "p", "censoring_rate", "method", "reps", "rejection_rate", "coverage", "mean_runtime_ms"]
        );
        let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), method.split(',').count());
        for row in rows {
            assert_eq!(&row[0], model);
            let rate: f64 = row[8].parse().unwrap();
            assert!((0.0..=1.0).contains(&rate));
        }
    }
}

#[test]
fn bench_prints_a_timing_line() {
    let out = survscreen(&["bench", "--n", "100", "--p", "300", "--threads", "2"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,p,q_n,variant,threads,generate_ms,screen_ms");
    assert!(lines[1].starts_with("100,300,50,full,2,"));
}
