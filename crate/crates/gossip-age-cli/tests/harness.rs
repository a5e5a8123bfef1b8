//! End-to-end checks of the sweep harness: output files, determinism,
//! failure isolation, and the binary's exit codes.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use gossip_age_cli::{
    emit_plot, parse_config_doc, preset, run, Engine, HarnessError, PlotStyle, RunOptions,
    SweepRow, SweepResult,
};

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Row {
    sweep_value: f64,
    engine: String,
    target: String,
    value: Option<f64>,
    stderr: Option<f64>,
}

fn parse_csv(doc: &str) -> Vec<Row> {
    let mut lines = doc.lines();
    assert_eq!(
        lines.next(),
        Some("sweep_value,engine,target,value,stderr"),
        "header is pinned"
    );
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols.len(), 5, "bad row {l}");
            let opt = |s: &str| {
                if s.is_empty() {
                    None
                } else {
                    Some(s.parse::<f64>().expect("numeric cell"))
                }
            };
            Row {
                sweep_value: cols[0].parse().expect("sweep value"),
                engine: cols[1].to_string(),
                target: cols[2].to_string(),
                value: opt(cols[3]),
                stderr: opt(cols[4]),
            }
        })
        .collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn fig6_preset_products() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run(
        preset("fig6").expect("preset"),
        &RunOptions {
            out: Some(dir.path().to_path_buf()),
            ..RunOptions::default()
        },
    )
    .expect("run");
    assert!(out.failures.is_empty());
    assert_eq!(out.result.rows.len(), 7 * 2 * 3);

    let csv = read(dir.path(), "results.csv");
    let rows = parse_csv(&csv);
    assert_eq!(rows.len(), 42);

    // the two engines agree on every toy target
    let mut by_key: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_key
            .entry((r.sweep_value.to_string(), r.target.clone()))
            .or_default()
            .push(r.value.expect("numeric"));
    }
    for ((sv, target), vals) in &by_key {
        assert_eq!(vals.len(), 2, "{sv}/{target}");
        assert!(
            rel_err(vals[0], vals[1]) < 1e-9,
            "engines disagree at {sv}/{target}: {vals:?}"
        );
    }

    // the exchange-free variant does not feel the swap rate at all
    let none: Vec<f64> = rows
        .iter()
        .filter(|r| r.target == "none:mean")
        .map(|r| r.value.unwrap())
        .collect();
    assert!(none.iter().all(|&v| v == none[0]));

    // fast exchange with the source-adjacent position beats the other order
    let at = |target: &str| {
        rows.iter()
            .find(|r| r.sweep_value == 1000.0 && r.engine == "exact" && r.target == target)
            .and_then(|r| r.value)
            .expect("row")
    };
    let v13 = at("exchange_13:mean");
    let v12 = at("exchange_12:mean");
    let vnone = at("none:mean");
    assert!(v13 < v12 && v12 < vnone, "{v13} {v12} {vnone}");

    assert!(dir.path().join("plot.svg").exists());
    let manifest = read(dir.path(), "manifest.json");
    assert!(manifest.contains("\"code_version\""));
    assert!(manifest.contains("\"failures\": []"));

    // byte determinism of a repeat run
    let dir2 = tempfile::tempdir().expect("tempdir");
    run(
        preset("fig6").expect("preset"),
        &RunOptions {
            out: Some(dir2.path().to_path_buf()),
            ..RunOptions::default()
        },
    )
    .expect("rerun");
    assert_eq!(csv, read(dir2.path(), "results.csv"));
    assert_eq!(read(dir.path(), "plot.svg"), read(dir2.path(), "plot.svg"));

    // the manifest alone reproduces the results file
    let dir3 = tempfile::tempdir().expect("tempdir");
    let from_manifest = parse_config_doc(&manifest).expect("manifest parses");
    run(
        from_manifest,
        &RunOptions {
            out: Some(dir3.path().to_path_buf()),
            ..RunOptions::default()
        },
    )
    .expect("manifest rerun");
    assert_eq!(csv, read(dir3.path(), "results.csv"));
}

fn small_sim_config(dir: &Path, values: &[f64]) -> gossip_age_cli::ScenarioConfig {
    let doc = format!(
        r#"{{
            "scenario": {{"name": "disconnected_pairs", "lambda_e": 1.0, "lambda": 1.0, "f_of_n": "n"}},
            "engines": ["exact", "simulate", "bounds", "no_mobility_reference"],
            "sweep": {{"parameter": "n", "values": {values:?}}},
            "sim": {{"horizon": 2000.0, "replications": 3, "seed": 11}},
            "output_dir": {:?}
        }}"#,
        dir.display().to_string()
    );
    parse_config_doc(&doc).expect("config parses")
}

#[test]
fn four_engines_share_one_sweep() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run(small_sim_config(dir.path(), &[6.0, 8.0]), &RunOptions::default()).expect("run");
    assert!(out.failures.is_empty());

    let csv = read(dir.path(), "results.csv");
    let rows = parse_csv(&csv);
    // per point: exact 1, simulate 1, bounds 2, reference 1
    assert_eq!(rows.len(), 10);
    for r in rows.iter().filter(|r| r.engine == "simulate") {
        assert!(r.stderr.expect("sim rows carry stderr") > 0.0);
        let exact = rows
            .iter()
            .find(|e| e.engine == "exact" && e.sweep_value == r.sweep_value)
            .and_then(|e| e.value)
            .expect("exact row");
        let sim = r.value.expect("sim value");
        assert!(
            rel_err(sim, exact) < 0.1,
            "short sim far from exact at n={}: {sim} vs {exact}",
            r.sweep_value
        );
        let recursion = rows
            .iter()
            .find(|e| {
                e.engine == "bounds"
                    && e.target == "bound_recursion"
                    && e.sweep_value == r.sweep_value
            })
            .and_then(|e| e.value)
            .expect("bound row");
        assert!(exact <= recursion, "bound must dominate the exact age");
    }

    // worker-count independence, seed through rayon and back
    for workers in [1usize, 4] {
        let d = tempfile::tempdir().expect("tempdir");
        run(
            small_sim_config(d.path(), &[6.0, 8.0]),
            &RunOptions {
                workers: Some(workers),
                ..RunOptions::default()
            },
        )
        .expect("run");
        assert_eq!(csv, read(d.path(), "results.csv"), "workers={workers}");
    }
}

#[test]
fn engine_failures_stay_local() {
    let doc = |values: &str, dir: &Path| {
        format!(
            r#"{{
                "scenario": {{"name": "fc_plus_single", "lambda_e": 1.0, "lambda": 1.0}},
                "engines": ["exact", "bounds"],
                "sweep": {{"parameter": "n", "values": {values}}},
                "output_dir": {:?},
                "plot": false
            }}"#,
            dir.display().to_string()
        )
    };
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = parse_config_doc(&doc("[6, 30]", dir.path())).expect("parses");
    let out = run(cfg, &RunOptions::default()).expect("run");
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].engine, Engine::Exact);
    assert_eq!(out.failures[0].sweep_value, 30.0);

    let rows = parse_csv(&read(dir.path(), "results.csv"));
    let marker = rows
        .iter()
        .find(|r| r.sweep_value == 30.0 && r.engine == "exact")
        .expect("marker row");
    assert_eq!(marker.target, "error:CapExceeded");
    assert!(marker.value.is_none() && marker.stderr.is_none());

    // the healthy point is untouched by its neighbor's failure
    let clean_dir = tempfile::tempdir().expect("tempdir");
    let clean = parse_config_doc(&doc("[6]", clean_dir.path())).expect("parses");
    run(clean, &RunOptions::default()).expect("clean run");
    let clean_rows = parse_csv(&read(clean_dir.path(), "results.csv"));
    for cr in &clean_rows {
        let matching = rows
            .iter()
            .find(|r| r.sweep_value == 6.0 && r.target == cr.target && r.engine == cr.engine)
            .expect("row survives");
        assert_eq!(matching.value, cr.value);
    }

    // bound rows exist even at the failed point
    assert!(rows
        .iter()
        .any(|r| r.sweep_value == 30.0 && r.target == "bound_recursion" && r.value.is_some()));
}

#[test]
fn plot_series_shapes() {
    let style = PlotStyle {
        title: "t".into(),
        x_label: "x".into(),
        y_label: "y".into(),
        log_x: true,
    };
    let single = SweepResult {
        rows: vec![
            SweepRow {
                sweep_value: 0.001,
                engine: Engine::Exact,
                target: "v1".into(),
                value: Some(1.0),
                stderr: None,
            },
            SweepRow {
                sweep_value: 1000.0,
                engine: Engine::Exact,
                target: "v1".into(),
                value: Some(2.0),
                stderr: None,
            },
        ],
    };
    let svg = emit_plot(&single, &style).expect("plots");
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains("0.001"), "log ticks label raw values");

    let empty = SweepResult { rows: vec![] };
    assert!(matches!(
        emit_plot(&empty, &style),
        Err(HarnessError::EmptyResult)
    ));

    // error rows alone cannot be plotted either
    let only_errors = SweepResult {
        rows: vec![SweepRow {
            sweep_value: 1.0,
            engine: Engine::Exact,
            target: "error:CapExceeded".into(),
            value: None,
            stderr: None,
        }],
    };
    assert!(matches!(
        emit_plot(&only_errors, &style),
        Err(HarnessError::EmptyResult)
    ));

    // fig6 renders one polyline per engine and target pair
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run(
        preset("fig6").expect("preset"),
        &RunOptions {
            out: Some(dir.path().to_path_buf()),
            no_plot: true,
            ..RunOptions::default()
        },
    )
    .expect("run");
    assert!(!dir.path().join("plot.svg").exists(), "--no-plot holds");
    let svg = emit_plot(
        &out.result,
        &PlotStyle {
            title: "toy sweep".into(),
            x_label: "lambda_m".into(),
            y_label: "version age".into(),
            log_x: true,
        },
    )
    .expect("plots");
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn config_validation() {
    let base = r#"{
        "scenario": {"name": "toy", "lambda_e": 1.0, "lambda": 1.0},
        "engines": ["exact"],
        "sweep": {"parameter": "lambda_m", "values": [1.0]}
    }"#;
    let okdir = tempfile::tempdir().expect("tempdir");
    assert!(run(
        parse_config_doc(base).unwrap(),
        &RunOptions {
            out: Some(okdir.path().to_path_buf()),
            no_plot: true,
            ..RunOptions::default()
        }
    )
    .is_ok());

    let rejected = [
        // empty engines
        r#"{"scenario": {"name": "toy", "lambda_e": 1.0, "lambda": 1.0},
            "engines": [], "sweep": {"parameter": "lambda_m", "values": [1.0]}}"#,
        // simulate without a sim block
        r#"{"scenario": {"name": "toy", "lambda_e": 1.0, "lambda": 1.0},
            "engines": ["simulate"], "sweep": {"parameter": "lambda_m", "values": [1.0]}}"#,
        // wrong sweep parameter for the family
        r#"{"scenario": {"name": "toy", "lambda_e": 1.0, "lambda": 1.0},
            "engines": ["exact"], "sweep": {"parameter": "n", "values": [4.0]}}"#,
        // fractional n
        r#"{"scenario": {"name": "fc_plus_single", "lambda_e": 1.0, "lambda": 1.0},
            "engines": ["exact"], "sweep": {"parameter": "n", "values": [6.5]}}"#,
        // nonpositive sweep value
        r#"{"scenario": {"name": "toy", "lambda_e": 1.0, "lambda": 1.0},
            "engines": ["exact"], "sweep": {"parameter": "lambda_m", "values": [0.0]}}"#,
        // no bound family for the plain clique
        r#"{"scenario": {"name": "fully_connected", "n": 6, "lambda_e": 1.0, "lambda": 1.0},
            "engines": ["bounds"], "sweep": {"parameter": "lambda_m", "values": [1.0]}}"#,
        // the echoed swap rate must match lambda
        r#"{"scenario": {"name": "fc_plus_single", "lambda_e": 1.0, "lambda": 1.0, "lambda_m": 2.0},
            "engines": ["exact"], "sweep": {"parameter": "n", "values": [6.0]}}"#,
        // bad rate
        r#"{"scenario": {"name": "toy", "lambda_e": -1.0, "lambda": 1.0},
            "engines": ["exact"], "sweep": {"parameter": "lambda_m", "values": [1.0]}}"#,
    ];
    for doc in rejected {
        let cfg = parse_config_doc(doc).expect("shape parses");
        match run(cfg, &RunOptions::default()) {
            Err(HarnessError::Config(_)) => {}
            other => panic!("expected config rejection for {doc}, got {other:?}"),
        }
    }

    // unknown fields are config errors, not silent ignores
    assert!(matches!(
        parse_config_doc(r#"{"bogus": 1}"#),
        Err(HarnessError::Config(_))
    ));
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_gossip-age");
    let code = |args: &[&str]| {
        Command::new(exe)
            .args(args)
            .output()
            .expect("binary runs")
            .status
            .code()
            .expect("exit code")
    };

    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("fig6");
    assert_eq!(code(&["run", "--preset", "fig6", "--out", out.to_str().unwrap(), "--no-plot"]), 0);
    assert!(out.join("results.csv").exists());

    assert_eq!(code(&["run"]), 1, "missing config and preset");
    assert_eq!(code(&["run", "--config", "/nonexistent/config.json"]), 1);
    assert_eq!(code(&["run", "--preset", "nope"]), 1);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["preset", "nope"]), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").expect("write");
    assert_eq!(code(&["run", "--config", bad.to_str().unwrap()]), 1);

    // a config whose exact engine fails at one point exits 2, having written results
    let capdir = dir.path().join("cap");
    let cap = dir.path().join("cap.json");
    std::fs::write(
        &cap,
        format!(
            r#"{{"scenario": {{"name": "fc_plus_single", "lambda_e": 1.0, "lambda": 1.0}},
                "engines": ["exact", "bounds"],
                "sweep": {{"parameter": "n", "values": [6, 30]}},
                "output_dir": {capdir:?}, "plot": false}}"#,
            capdir = capdir.display().to_string()
        ),
    )
    .expect("write");
    assert_eq!(code(&["run", "--config", cap.to_str().unwrap()]), 2);
    assert!(capdir.join("results.csv").exists());

    let echo = Command::new(exe)
        .args(["preset", "fig8"])
        .output()
        .expect("binary runs");
    assert_eq!(echo.status.code(), Some(0));
    let printed = String::from_utf8(echo.stdout).expect("utf8");
    let cfg = parse_config_doc(&printed).expect("printed preset parses");
    let json = serde_json::to_string(&cfg).expect("serializes");
    assert!(json.contains("\"lambda_m\":1.0"), "swap rate is echoed: {json}");
}
