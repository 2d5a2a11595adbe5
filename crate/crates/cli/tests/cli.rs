use std::path::Path;
use std::process::{Command, Output};

use intercorr::{CaseTriplet, Mobility, NetworkParams};
use intercorr_cli::sim_tolerance;
use intercorr_cli::spec::{CommandKind, OutputFormat, RunSpec};
use serde_json::Value;

fn intercorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intercorr"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--output", "json"]);
    let out = intercorr(&all);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

/// Data rows of a CSV output, after the provenance line.
fn csv_rows(text: &str) -> (RunSpec, Vec<csv::StringRecord>) {
    let (first, rest) = text.split_once('\n').unwrap();
    let spec = RunSpec::from_csv_comment(first).expect("run_spec comment");
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    (spec, reader.records().map(|r| r.unwrap()).collect())
}

fn round_trips(doc: &Value) -> RunSpec {
    let spec: RunSpec = serde_json::from_value(doc["run_spec"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&spec).unwrap(), doc["run_spec"]);
    spec
}

#[test]
fn json_run_spec_round_trips() {
    let doc = json(&[
        "acf", "--case", "0,2,1", "--c", "22", "--m", "0.5", "--p", "0.9", "--lags", "1..20",
    ]);
    let spec = round_trips(&doc);
    let mut expected = RunSpec::new(
        CommandKind::Acf,
        NetworkParams {
            nakagami_m: 0.5,
            channel_block_len: 22,
            start_prob: 0.9,
            ..NetworkParams::default()
        },
        OutputFormat::Json,
    );
    expected.case = Some("0,2,1".parse::<CaseTriplet>().unwrap());
    expected.lags = Some((1..=20).collect());
    assert_eq!(spec, expected);

    for args in [
        &["coherence", "--case", "0,0,2", "--d", "3", "--p", "0.1"][..],
        &["table1", "--m", "1"],
        &[
            "simulate",
            "--case",
            "2,0,1",
            "--p",
            "0.3",
            "--realizations",
            "50",
            "--slots",
            "6",
            "--seed",
            "7",
        ],
        &[
            "validate",
            "--mobility",
            "brownian",
            "--v",
            "0.3",
            "--p",
            "0.123456789",
        ],
    ] {
        let spec = round_trips(&json(args));
        assert_eq!(spec.output, OutputFormat::Json);
    }
}

#[test]
fn csv_embeds_run_spec_and_header() {
    let out = intercorr(&[
        "acf", "--case", "0,2,1", "--c", "22", "--m", "0.5", "--p", "0.9", "--lags", "1..20",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let (spec, rows) = csv_rows(&text);
    assert_eq!(spec.command, CommandKind::Acf);
    assert_eq!(spec.params.channel_block_len, 22);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("label,case,lag,acf"));
    assert_eq!(rows.len(), 20);
    // c = 22, m = 1/2, p = 0.9: p (1/m) (1 − τ/c) / ((m + 1)/m − p)
    for row in rows {
        let lag: f64 = row[2].parse().unwrap();
        let value: f64 = row[3].parse().unwrap();
        let expected = 0.9 * 2.0 * (1.0 - lag / 22.0) / (3.0 - 0.9);
        assert!(
            (value - expected).abs() < 1e-12,
            "lag {lag}: {value} vs {expected}"
        );
    }
}

#[test]
fn traffic_only_coherence_from_closed_form() {
    let out = intercorr(&[
        "coherence",
        "--case",
        "0,0,2",
        "--d",
        "4",
        "--p",
        "0.2",
        "--theta",
        "0",
    ]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&stdout(&out));
    let mu: f64 = 0.8;
    let q: f64 = 1.0 - 0.2 / (1.0 - 0.2 * 3.0);
    let expected = ((1.0 - mu).ln() / q.ln()).ceil();
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), expected);
    assert_eq!(&rows[0][6], "closed_form");
}

#[test]
fn table1_at_rayleigh_has_no_mismatches() {
    let out = intercorr(&["table1", "--m", "1"]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 26);
    for row in &rows {
        assert_eq!(&row[4], "0", "{row:?}");
    }
    let compared: usize = rows.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert!(compared > 10_000);
}

fn curve_file(dir: &Path, name: &str, args: &[&str]) -> Value {
    let path = dir.join(name);
    let mut all = args.to_vec();
    all.extend(["--output", "json", "--out", path.to_str().unwrap()]);
    let out = intercorr(&all);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_then_acf_agree() {
    let dir = tempfile::tempdir().unwrap();
    let common = [
        "--case", "0,2,2", "--c", "6", "--d", "3", "--m", "2", "--p", "0.1", "--lags", "1..8",
    ];
    let mut sim_args = vec![
        "simulate",
        "--realizations",
        "4000",
        "--slots",
        "12",
        "--seed",
        "3",
    ];
    sim_args.extend(common);
    let mut acf_args = vec!["acf"];
    acf_args.extend(common);
    let sim = curve_file(dir.path(), "sim.json", &sim_args);
    let ana = curve_file(dir.path(), "acf.json", &acf_args);
    let sim_curve = &sim["curves"][0]["curve"];
    let ana_curve = &ana["curves"][0]["curve"];
    for i in 0..8 {
        let s = sim_curve["values"][i].as_f64().unwrap();
        let se = sim_curve["std_errors"][i].as_f64().unwrap();
        let a = ana_curve["values"][i].as_f64().unwrap();
        assert!(
            (s - a).abs() <= sim_tolerance(se),
            "lag {}: {s} ± {se} vs {a}",
            i + 1
        );
    }
    assert_eq!(sim["run_spec"]["seed"], 3);
}

#[test]
fn simulate_is_deterministic_and_exports_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("ens.bin");
    let args = [
        "simulate",
        "--case",
        "2,2,2",
        "--c",
        "3",
        "--d",
        "2",
        "--p",
        "0.2",
        "--realizations",
        "30",
        "--slots",
        "5",
        "--seed",
        "11",
        "--ensemble-out",
        bin.to_str().unwrap(),
    ];
    let a = intercorr(&args);
    let b = intercorr(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let bytes = std::fs::read(&bin).unwrap();
    let (n, t, series) = intercorr::sim::read_binary(bytes.as_slice()).unwrap();
    assert_eq!((n, t, series.len()), (30, 5, 150));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.toml");
    std::fs::write(&path, "m = 2.0\nc = 9\nmobility = \"linear\"\nv = 0.2\n").unwrap();
    let doc = json(&["validate", "--config", path.to_str().unwrap(), "--c", "4"]);
    let spec = round_trips(&doc);
    assert_eq!(spec.params.nakagami_m, 2.0);
    assert_eq!(spec.params.channel_block_len, 4);
    assert_eq!(spec.params.mobility, Mobility::Linear);
    assert_eq!(doc["valid"], true);

    std::fs::write(&path, "speed = 1\n").unwrap();
    assert_eq!(
        intercorr(&["validate", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exit_codes() {
    // usage errors
    assert_eq!(intercorr(&["acf"]).status.code(), Some(2));
    assert_eq!(
        intercorr(&["acf", "--case", "3,0,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        intercorr(&["acf", "--case", "0,2,1", "--lags", "0..4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        intercorr(&["acf", "--preset", "fig5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        intercorr(&["acf", "--preset", "fig2", "--p", "0.3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        intercorr(&["simulate", "--case", "0,2,1", "--slots", "4", "--lags", "1..5"])
            .status
            .code(),
        Some(2)
    );
    // inadmissible parameters and undefined correlation
    assert_eq!(
        intercorr(&["validate", "--p", "0.6", "--d", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        intercorr(&["acf", "--case", "0,2,1", "--p", "0.6", "--d", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        intercorr(&["acf", "--case", "0,0,0"]).status.code(),
        Some(1)
    );
    // inconclusive search still writes its result
    let out = intercorr(&[
        "coherence",
        "--case",
        "2,0,1",
        "--mobility",
        "brownian",
        "--v",
        "0.1",
        "--p",
        "0.9",
        "--theta",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("inconclusive(>1000)"));
    assert!(!String::from_utf8_lossy(&out.stderr).contains('\x1b'));
}

#[test]
fn presets_produce_every_series() {
    let doc = json(&["acf", "--preset", "fig2"]);
    let curves = doc["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 5);
    assert_eq!(doc["run_spec"]["preset"], "fig2");
    round_trips(&doc);

    let out = intercorr(&["coherence", "--preset", "fig5"]);
    assert!(out.status.success());
    let (spec, rows) = csv_rows(&stdout(&out));
    assert_eq!(spec.threshold, Some(0.0));
    for row in &rows {
        let unrounded: f64 = row[7].parse().unwrap();
        let integer: f64 = row[5].parse().unwrap();
        assert!(unrounded > 0.0 && integer >= unrounded - 1e-9 && integer < unrounded + 1.0);
    }

    let out = intercorr(&["coherence", "--preset", "fig8"]);
    assert!(out.status.success());
    let (_, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 250);
}
