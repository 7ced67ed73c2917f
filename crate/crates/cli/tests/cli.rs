//! End-to-end tests of the `forebench` binary: spawn it, check exit codes
//! and outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn forebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forebench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn encode_identity_renders_digit_tokens() {
    let out = forebench(&["encode", "--identity", "--precision", "2", "1", "2", "3"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(parsed["text"], "1 0 0 , 2 0 0 , 3 0 0");
    assert_eq!(parsed["offset"], 0.0);
    assert_eq!(parsed["scale"], 1.0);
    assert_eq!(parsed["count"], 3);
}

#[test]
fn decode_prints_one_value_per_line() {
    let out = forebench(&["decode", "--precision", "2", "1 0 0 , 2 0 0 , 3 0 0"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "1\n2\n3\n");
}

#[test]
fn encode_then_decode_round_trips_within_grain() {
    let values = ["12.34", "-5.6", "78.9", "0.01", "44.44"];
    let mut args = vec!["encode", "--alpha", "0.99", "--beta", "0.3", "--precision", "3"];
    args.extend(values);
    let out = forebench(&args);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let parsed: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();

    let offset = parsed["offset"].as_f64().unwrap().to_string();
    let scale_num = parsed["scale"].as_f64().unwrap();
    let scale = scale_num.to_string();
    let out = forebench(&[
        "decode",
        "--offset",
        &offset,
        "--scale",
        &scale,
        "--precision",
        "3",
        parsed["text"].as_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let decoded: Vec<f64> = stdout(&out)
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let grain = 1e-3 * scale_num;
    for (d, v) in decoded.iter().zip(values.iter().map(|v| v.parse::<f64>().unwrap())) {
        assert!(
            (d - v).abs() <= grain + 1e-12,
            "decoded {d}, original {v}, grain {grain}"
        );
    }
}

#[test]
fn decode_garbage_exits_one() {
    let out = forebench(&["decode", "no digits here"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn gen_synth_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = forebench(&[
            "gen-synth",
            "--kind",
            "sine",
            "--sigma",
            "0.1",
            "--n",
            "50",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);
    let text = String::from_utf8(bytes_a).unwrap();
    assert_eq!(text.lines().count(), 51);
    assert_eq!(text.lines().next(), Some("t,v"));
}

#[test]
fn gen_synth_unknown_kind_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = forebench(&[
        "gen-synth",
        "--kind",
        "square",
        "--sigma",
        "0.1",
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

fn write_config(dir: &Path, cache: bool) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let cache_line = if cache {
        format!("\"cache_dir\": {:?},", dir.join("cache").to_str().unwrap())
    } else {
        String::new()
    };
    fs::write(
        &path,
        format!(
            r#"{{
                "datasets": [
                    {{"kind": "sine", "sigma": 0.0, "n_points": 200, "horizon": 20}}
                ],
                "models": ["arima", "llmtime"],
                "llmtime": {{
                    "num_samples": 2,
                    "scaling": {{"alpha": 0.99, "beta": 0.3, "precision": 2}},
                    "provider": {{"type": "mock", "behavior": "repeat_last_period", "period": 25}}
                }},
                "arima": {{"max_p": 3, "max_d": 0, "max_q": 1}},
                {cache_line}
                "output_dir": {:?},
                "seed": 5
            }}"#,
            dir.join("out").to_str().unwrap()
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_produces_report_table_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), false);
    let out = forebench(&["run", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let text = stdout(&out);
    assert!(text.contains("dataset"), "stdout: {text}");
    assert!(text.contains("sine-sigma0"), "stdout: {text}");

    let out_dir = dir.path().join("out");
    assert!(out_dir.join("report.json").is_file());
    assert!(out_dir.join("table.txt").is_file());
    assert!(out_dir.join("table.csv").is_file());
    assert!(out_dir.join("traces").join("sine-sigma0__arima.csv").is_file());
    assert!(out_dir.join("traces").join("sine-sigma0__llmtime.csv").is_file());
    assert!(out_dir.join("traces").join("sine-sigma0.svg").is_file());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert!(report["versions"].as_str().unwrap().contains("report-schema"));
}

#[test]
fn run_out_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), false);
    let alt = dir.path().join("alt-out");
    let out = forebench(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        alt.to_str().unwrap(),
        "--only-model",
        "arima",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(alt.join("report.json").is_file());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(alt.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 1);
    assert_eq!(report["rows"][0]["model"], "arima");
}

#[test]
fn run_rejects_unknown_model_filter_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), false);
    let out = forebench(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--only-model",
        "prophet",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn run_empty_models_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"datasets": [{"kind": "sine", "sigma": 0.0}], "models": []}"#,
    )
    .unwrap();
    let out = forebench(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
}

#[test]
fn run_missing_config_exits_one() {
    let out = forebench(&["run", "--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
}

#[test]
fn rerun_with_warm_cache_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), true);
    let run_once = || {
        let out = forebench(&["run", "--config", config.to_str().unwrap()]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    };
    run_once();
    let report_a = fs::read(dir.path().join("out/report.json")).unwrap();
    let table_a = fs::read(dir.path().join("out/table.csv")).unwrap();
    let trace_a = fs::read(dir.path().join("out/traces/sine-sigma0__llmtime.csv")).unwrap();
    run_once();
    assert_eq!(report_a, fs::read(dir.path().join("out/report.json")).unwrap());
    assert_eq!(table_a, fs::read(dir.path().join("out/table.csv")).unwrap());
    assert_eq!(
        trace_a,
        fs::read(dir.path().join("out/traces/sine-sigma0__llmtime.csv")).unwrap()
    );
}
