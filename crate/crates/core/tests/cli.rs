use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_dxp");

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn dxp(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Runs a command over a fixture pair, e.g. `on("running", ...)`.
fn on(fixture: &str, args: &[&str]) -> Output {
    let model = data(&format!("{fixture}.json"));
    let instance = data(&format!("{fixture}_instance.json"));
    let mut full: Vec<&str> = vec![args[0], "--model", &model, "--instance", &instance];
    full.extend_from_slice(&args[1..]);
    dxp(&full)
}

fn records(out: &Output) -> Vec<Value> {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn features(v: &Value) -> Vec<u64> {
    v["features"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

const RUNNING: [&str; 4] = ["-e", "1", "-n", "l1"];

#[test]
fn cxp_running_example_every_algorithm() {
    for algo in ["linear", "dicho", "swift"] {
        for q in ["1", "2", "5"] {
            let mut args = vec!["cxp", "--algo", algo, "--workers", q];
            args.extend(RUNNING);
            let r = records(&on("running", &args));
            assert_eq!(r.len(), 1);
            assert_eq!(features(&r[0]), vec![1], "{algo} q={q}");
            assert_eq!(r[0]["kind"], "cxp");
            assert_eq!(r[0]["verified"], true);
            assert!(r[0]["oracle_calls"].as_u64().unwrap() >= 1);
            assert!(r[0]["wall_ms"].is_f64());
        }
    }
}

#[test]
fn no_adversarial_example_exits_2() {
    for cmd in ["cxp", "min-cxp", "enumerate", "ffa"] {
        let out = on("constant", &[cmd, "-e", "3", "-n", "l0"]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        assert_eq!(
            String::from_utf8_lossy(&out.stderr).trim(),
            "epsilon too small: no d-CXp; d-AXp = {}"
        );
    }
}

#[test]
fn axp_running_example() {
    let r = records(&on("running", &["axp", "-e", "1", "-n", "l1"]));
    assert_eq!(r[0]["kind"], "axp");
    assert_eq!(features(&r[0]), vec![1]);
    let r = records(&on("running", &["axp", "-e", "1", "-n", "l1", "--from", "1,3"]));
    assert_eq!(features(&r[0]), vec![1]);
    let out = on("running", &["axp", "-e", "1", "-n", "l1", "--from", "2,3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn enumerate_and_model() {
    let r = records(&on("and", &["enumerate", "-e", "1", "-n", "l0"]));
    let cxps: Vec<_> = r.iter().filter(|v| v["kind"] == "cxp").map(features).collect();
    let axps: Vec<_> = r.iter().filter(|v| v["kind"] == "axp").map(features).collect();
    assert_eq!(cxps, vec![vec![1], vec![2]]);
    assert_eq!(axps, vec![vec![1, 2]]);
    let summary = r.last().unwrap();
    assert_eq!(summary["record"], "summary");
    assert_eq!(summary["complete"], true);
    assert_eq!(summary["cxps"], 2);
    assert_eq!(summary["axps"], 1);
}

#[test]
fn enumerate_limit_one() {
    let r = records(&on("and", &["enumerate", "-e", "1", "-n", "l0", "--limit", "1"]));
    assert_eq!(r.iter().filter(|v| v["record"] == "explanation").count(), 1);
    assert_eq!(r.last().unwrap()["complete"], false);
}

#[test]
fn enumerate_running_example() {
    let r = records(&on("running", &["enumerate", "-e", "1", "-n", "l1"]));
    assert_eq!(r.iter().filter(|v| v["kind"] == "cxp").count(), 1);
    assert_eq!(r.iter().filter(|v| v["kind"] == "axp").count(), 1);
    assert!(r
        .iter()
        .filter(|v| v["record"] == "explanation")
        .all(|v| features(v) == vec![1]));
}

#[test]
fn ffa_csv_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("and.pgm");
    let out = on(
        "and",
        &[
            "ffa",
            "-e",
            "1",
            "-n",
            "l0",
            "--shape",
            "2x2",
            "--heatmap",
            pgm.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "feature,score\n1,0.5\n2,0.5\n3,0.0\n4,0.0\n"
    );
    let text = std::fs::read_to_string(&pgm).unwrap();
    let pixels: Vec<u32> = text.split_whitespace().skip(4).map(|t| t.parse().unwrap()).collect();
    assert!(text.starts_with("P2\n2 2\n255\n"));
    assert_eq!(pixels, vec![128, 128, 0, 0]);

    let single = dir.path().join("running.pgm");
    let out = on(
        "running",
        &[
            "ffa",
            "-e",
            "1",
            "-n",
            "l1",
            "--shape",
            "1x3",
            "--heatmap",
            single.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&single).unwrap();
    let pixels: Vec<u32> = text.split_whitespace().skip(4).map(|t| t.parse().unwrap()).collect();
    assert_eq!(pixels, vec![255, 0, 0]);
}

#[test]
fn ffa_shape_mismatch_is_a_usage_error() {
    let out = on(
        "and",
        &["ffa", "-e", "1", "-n", "l0", "--shape", "3x3", "--heatmap", "/dev/null"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));
}

#[test]
fn min_cxp_sizes() {
    let r = records(&on("running", &["min-cxp", "-e", "1", "-n", "l1"]));
    assert_eq!(r[0]["size"], 1);
    assert_eq!(r[0]["lower_bound"], 1);
    assert!(r[0]["iterations"].as_u64().unwrap() >= 1);
    let r = records(&on("or", &["min-cxp", "-e", "2", "-n", "l0"]));
    assert_eq!(features(&r[0]), vec![1, 2]);
    assert_eq!(r[0]["size"], 2);
}

#[test]
fn output_is_byte_stable_without_timing() {
    let runs = [
        vec![
            "cxp",
            "-e",
            "1",
            "-n",
            "l0",
            "--algo",
            "swift",
            "--workers",
            "3",
            "--no-timing",
        ],
        vec!["enumerate", "-e", "1", "-n", "l0", "--no-timing"],
        vec!["min-cxp", "-e", "1", "-n", "l0", "--no-timing"],
    ];
    for args in runs {
        let first = on("and", &args);
        assert!(first.status.success());
        for _ in 0..3 {
            assert_eq!(on("and", &args).stdout, first.stdout, "{args:?}");
        }
    }
}

#[test]
fn output_file_option() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    let out = on(
        "running",
        &["cxp", "-e", "1", "-n", "l1", "--output", path.to_str().unwrap()],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(std::fs::read_to_string(&path).unwrap().trim()).unwrap();
    assert_eq!(features(&v), vec![1]);
}

#[test]
fn linear_model_over_real_domains() {
    for algo in ["linear", "dicho", "swift"] {
        let r = records(&on("linear", &["cxp", "-e", "1", "-n", "linf", "--algo", algo]));
        assert_eq!(features(&r[0]), vec![1], "{algo}");
        assert!(r[0].get("verified").is_none());
    }
    let out = on("linear", &["cxp", "-e", "1", "-n", "l0", "--oracle", "exhaustive"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn external_oracle_through_serve() {
    let model = data("running.json");
    let oracle = format!("external:{BIN} serve --model {model}");
    for algo in ["linear", "dicho", "swift"] {
        let r = records(&on(
            "running",
            &["cxp", "-e", "1", "-n", "l1", "--algo", algo, "--oracle", &oracle],
        ));
        assert_eq!(features(&r[0]), vec![1], "{algo}");
    }
    let local = records(&on("and", &["enumerate", "-e", "1", "-n", "l0", "--no-timing"]));
    let and_oracle = format!("external:{BIN} serve --model {}", data("and.json"));
    let remote = records(&on(
        "and",
        &[
            "enumerate",
            "-e",
            "1",
            "-n",
            "l0",
            "--no-timing",
            "--oracle",
            &and_oracle,
        ],
    ));
    assert_eq!(local, remote);
}

#[test]
fn bad_inputs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"linear","num_features":1,"num_classes":2,"domains":[{"type":"real"}],"weights":[[1],[2]],"biases":"x"}"#).unwrap();
    let out = dxp(&[
        "cxp",
        "-m",
        bad.to_str().unwrap(),
        "-i",
        &data("running_instance.json"),
        "-e",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("biases"));

    let out = on("running", &["cxp", "-e", "1", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let out = on("running", &["cxp", "-e", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = on("running", &["cxp", "-e", "1", "--oracle", "linear"]);
    assert_eq!(out.status.code(), Some(1));
    let out = dxp(&[
        "cxp",
        "-m",
        &data("running.json"),
        "-i",
        &data("and_instance.json"),
        "-e",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dxp(&["--help"]).status.success());
}

#[test]
fn bench_rows_agree() {
    let out = dxp(&["bench", "--synthetic", "48", "-e", "1", "--workers", "4", "--no-timing"]);
    let r = records(&out);
    assert_eq!(r.iter().filter(|v| v["record"] == "bench").count(), 3);
    let summary = r.last().unwrap();
    assert_eq!(summary["record"], "bench-summary");
    assert_eq!(summary["outputs_agree"], true);
    assert_eq!(
        out.stdout,
        dxp(&["bench", "--synthetic", "48", "-e", "1", "--workers", "4", "--no-timing"]).stdout
    );
}
