//! Behavior tests for the `attn` binary: exit codes, atomicity, output
//! schemas, and determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn attn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn data_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|n| n != "run_manifest.json")
                .collect()
        })
        .unwrap_or_default();
    names.sort();
    names
}

/// A ring of follows plus identical activity: every user ends up identical,
/// so every concentration measure is exactly zero.
fn equality_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let edges = dir.join("edges.csv");
    let activity = dir.join("activity.csv");
    let mut e = String::from("src,dst,action,timestamp\n");
    let mut a = String::from("user_id,timestamp,kind,count\n");
    for i in 0..6 {
        let next = (i + 1) % 6;
        e.push_str(&format!("u{i},u{next},create,100\n"));
        a.push_str(&format!("u{i},150,TWEET,3\n"));
        a.push_str(&format!("u{i},160,RETWEET_RECEIVED,2\n"));
        a.push_str(&format!("u{i},170,MENTION_RECEIVED,1\n"));
    }
    write(&edges, &e);
    write(&activity, &a);
    (edges, activity)
}

#[test]
fn missing_input_exits_2_with_no_partial_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "analyze",
        "--edges",
        tmp.path().join("nope.csv").to_str().unwrap(),
        "--activity",
        tmp.path().join("nope2.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 2);
    let leftover: Vec<_> = fs::read_dir(&out_dir)
        .map(|d| d.filter_map(|e| e.ok()).collect())
        .unwrap_or_default();
    assert!(leftover.is_empty(), "partial outputs: {leftover:?}");
}

#[test]
fn malformed_edge_row_exits_2_and_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("edges.csv");
    write(&edges, "src,dst,action,timestamp\nu1,u2,folow,100\n");
    let activity = tmp.path().join("activity.csv");
    write(&activity, "user_id,timestamp,kind,count\n");
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--activity",
        activity.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 2);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(data_files(&out_dir).is_empty());
}

#[test]
fn equality_fixture_reports_zero_gini_everywhere() {
    let tmp = tempfile::tempdir().unwrap();
    let (edges, activity) = equality_fixture(tmp.path());
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--activity",
        activity.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("inequality_report.json"))).unwrap();
    for metric in ["followers", "retweets", "mentions", "friends", "tweets"] {
        assert_eq!(report[metric]["gini"].as_f64().unwrap(), 0.0, "{metric}");
    }
    let series = read(&out_dir.join("gini_series.csv"));
    for line in series.lines().skip(1) {
        for cell in line.split(',').skip(1) {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn analyze_is_idempotent_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let (edges, activity) = equality_fixture(tmp.path());
    let run = |out: &Path| {
        let result = attn(&[
            "analyze",
            "--edges",
            edges.to_str().unwrap(),
            "--activity",
            activity.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&result), 0);
    };
    let out1 = tmp.path().join("out1");
    let out2 = tmp.path().join("out2");
    run(&out1);
    run(&out2);
    let names = data_files(&out1);
    assert_eq!(names, data_files(&out2));
    for name in names {
        assert_eq!(
            fs::read(out1.join(&name)).unwrap(),
            fs::read(out2.join(&name)).unwrap(),
            "{name} differs"
        );
    }
}

fn q1_params_json(dir: &Path, n: u64) -> PathBuf {
    let path = dir.join("q1.json");
    let params = attn_core::model::presets::q1(n);
    write(&path, &params.to_json());
    path
}

#[test]
fn predict_horizon_zero_returns_the_input_state() {
    let tmp = tempfile::tempdir().unwrap();
    let params = q1_params_json(tmp.path(), 5600);
    let state = tmp.path().join("state.csv");
    write(&state, "user_id,f0,r,m\na,120,3,1\nb,40,0,0\nc,900,25,4\n");
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "predict",
        "--params",
        params.to_str().unwrap(),
        "--state",
        state.to_str().unwrap(),
        "--horizon",
        "0",
        "--mode",
        "closed",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    let trajectories = read(&out_dir.join("trajectories.csv"));
    let rows: Vec<&str> = trajectories.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let f_values: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(f_values, vec![120.0, 40.0, 900.0]);

    let gini_csv = read(&out_dir.join("predicted_gini.csv"));
    let predicted: f64 = gini_csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    let sample = attn_core::ValueSample::new(vec![120.0, 40.0, 900.0]).unwrap();
    let expected = attn_core::gini(&sample).unwrap();
    assert!((predicted - expected).abs() < 1e-15);
}

#[test]
fn predict_modes_share_a_schema_but_not_values() {
    let tmp = tempfile::tempdir().unwrap();
    let params = q1_params_json(tmp.path(), 5600);
    let state = tmp.path().join("state.csv");
    write(&state, "user_id,f0,r,m\na,1058,50,7\n");
    let run = |mode: &str, out: &Path| {
        let result = attn(&[
            "predict",
            "--params",
            params.to_str().unwrap(),
            "--state",
            state.to_str().unwrap(),
            "--horizon",
            "4",
            "--mode",
            mode,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&result), 0);
        read(&out.join("trajectories.csv"))
    };
    let closed = run("closed", &tmp.path().join("closed"));
    let ode = run("ode", &tmp.path().join("ode"));
    let header = |s: &str| s.lines().next().unwrap().to_string();
    assert_eq!(header(&closed), "user,t,f");
    assert_eq!(header(&ode), "user,t,f");
    assert_eq!(closed.lines().count(), ode.lines().count());
    assert_ne!(closed, ode, "the two routes are distinct models");
}

#[test]
fn predict_closed_single_user_matches_scalar_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let params = q1_params_json(tmp.path(), 5600);
    let state = tmp.path().join("state.csv");
    write(&state, "user_id,f0,r,m\nsolo,1058,50,7\n");
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "predict",
        "--params",
        params.to_str().unwrap(),
        "--state",
        state.to_str().unwrap(),
        "--horizon",
        "1",
        "--mode",
        "closed",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0);
    let trajectories = read(&out_dir.join("trajectories.csv"));
    let f1: f64 = trajectories
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    // Term-by-term oracle with the bundled Q1 constants.
    let b = -(0.00215 * 50f64.powf(0.634) + 0.00038 * 7f64.powf(0.865));
    let k = 0.00836 * 50f64.powf(-0.129);
    let oracle = 1058.0 + 8546.0 * b.exp() - 8546.0 * k.exp() - b * 5600.0;
    assert!((f1 - oracle).abs() < 1e-9, "got {f1}, oracle {oracle}");
}

#[test]
fn predict_overflow_exits_4_and_names_the_user() {
    let tmp = tempfile::tempdir().unwrap();
    let params = q1_params_json(tmp.path(), 5600);
    let state = tmp.path().join("state.csv");
    write(&state, "user_id,f0,r,m\nblows_up,100,1,0\n");
    let out_dir = tmp.path().join("out");
    // k = w3 = 0.00836 at r = 1; e^(k t) overflows beyond t ~ 85k periods.
    let result = attn(&[
        "predict",
        "--params",
        params.to_str().unwrap(),
        "--state",
        state.to_str().unwrap(),
        "--horizon",
        "90000",
        "--mode",
        "closed",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 4);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("blows_up"), "stderr: {stderr}");
    assert!(data_files(&out_dir).is_empty(), "no partial outputs");
}

#[test]
fn simulate_is_seed_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("sim.json");
    let mut cfg = attn_core::sim::reference_config(7);
    cfg.n_users = 120;
    cfg.n_steps = 8;
    for p in cfg.class_params.values_mut() {
        p.n = 120;
    }
    write(&config, &cfg.to_json());
    let run = |out: &Path| {
        let result = attn(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    };
    let out1 = tmp.path().join("s1");
    let out2 = tmp.path().join("s2");
    run(&out1);
    run(&out2);
    assert_eq!(
        read(&out1.join("sim_metrics.csv")),
        read(&out2.join("sim_metrics.csv"))
    );
    assert_eq!(
        read(&out1.join("sim_users.csv")),
        read(&out2.join("sim_users.csv"))
    );

    // A seed override must change the trajectory.
    let out3 = tmp.path().join("s3");
    let result = attn(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "8",
        "--out",
        out3.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0);
    assert_ne!(
        read(&out1.join("sim_metrics.csv")),
        read(&out3.join("sim_metrics.csv"))
    );
}

#[test]
fn simulate_zero_steps_writes_one_metrics_row() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("sim.json");
    let mut cfg = attn_core::sim::reference_config(3);
    cfg.n_users = 50;
    cfg.n_steps = 0;
    for p in cfg.class_params.values_mut() {
        p.n = 50;
    }
    write(&config, &cfg.to_json());
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0);
    let metrics = read(&out_dir.join("sim_metrics.csv"));
    assert_eq!(metrics.lines().count(), 2, "header plus the initial row");
}

#[test]
fn simulate_rejects_bad_config_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("sim.json");
    write(&config, "{\"n_users\": 2}");
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 2);
    assert!(data_files(&out_dir).is_empty());
}

#[test]
fn fit_rejects_too_few_users_with_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let windows = tmp.path().join("windows.csv");
    write(
        &windows,
        "user_id,window,p,f_start,r,m,gained,lost\nu1,0,1,10,1,1,1,0\nu2,0,1,5,1,1,0,0\n",
    );
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "fit",
        "--windows",
        windows.to_str().unwrap(),
        "--population-n",
        "100",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 3);
}

#[test]
fn fit_recovers_generator_parameters_through_the_binary() {
    // Windows synthesized from the bundled Q1 constants with zero noise
    // beyond integer rounding of the event counts; the huge follow pool
    // makes that rounding negligible for the gain fit.
    let tmp = tempfile::tempdir().unwrap();
    let n: u64 = 2_000_000;
    let params = attn_core::model::presets::q1(n);
    let mut csv = String::from("user_id,window,p,f_start,r,m,gained,lost\n");
    for user in 0..50u64 {
        let f_start = 500 + user * 40;
        for window in 0..20u64 {
            let phase = (user * 20 + window) as f64;
            // Integer attention counts, so the file carries exactly what the
            // probabilities were computed from.
            let r = (1.0 + 299.0 * (phase * 0.37).sin().abs()).round();
            let m = (1.0 + 90.0 * (phase * 0.53).cos().abs()).round();
            let state = attn_core::AttentionState {
                f0: f_start,
                r,
                m,
                p: 0.0,
            };
            let p_plus = attn_core::gain_probability(&params, &state);
            let p_minus = attn_core::loss_probability(&params, &state);
            let gained = (p_plus * (n - f_start) as f64).round() as u64;
            let lost = (p_minus * f_start as f64).round() as u64;
            csv.push_str(&format!(
                "u{user:02},{window},3,{f_start},{},{},{gained},{lost}\n",
                r as u64, m as u64
            ));
        }
    }
    let windows_path = tmp.path().join("windows.csv");
    write(&windows_path, &csv);

    let run_fit = |out: &Path| {
        let result = attn(&[
            "fit",
            "--windows",
            windows_path.to_str().unwrap(),
            "--population-n",
            &n.to_string(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    };
    let out1 = tmp.path().join("fit1");
    run_fit(&out1);
    let fitted =
        attn_core::ModelParams::from_json(&read(&out1.join("params_Q1.json"))).unwrap();
    assert!(
        (fitted.alpha - 0.634).abs() < 1e-3,
        "alpha {} vs 0.634",
        fitted.alpha
    );
    assert!(
        (fitted.theta - 0.129).abs() < 0.05,
        "theta {} vs 0.129",
        fitted.theta
    );

    // Two runs on the same input produce byte-identical parameter files.
    let out2 = tmp.path().join("fit2");
    run_fit(&out2);
    for name in data_files(&out1) {
        assert_eq!(
            fs::read(out1.join(&name)).unwrap(),
            fs::read(out2.join(&name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn windows_command_round_trips_through_fit_input_format() {
    let tmp = tempfile::tempdir().unwrap();
    let (edges, activity) = equality_fixture(tmp.path());
    let out_dir = tmp.path().join("out");
    let result = attn(&[
        "windows",
        "--edges",
        edges.to_str().unwrap(),
        "--activity",
        activity.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0);
    let text = read(&out_dir.join("windows.csv"));
    assert!(text.starts_with("user_id,window,p,f_start,r,m,gained,lost\n"));
    let windows = attn_core::ingest::parse_windows_csv(text.as_bytes()).unwrap();
    assert_eq!(windows.len(), 6);
    for w in &windows {
        assert_eq!(w.gained, 1);
        assert_eq!(w.p, 3);
    }
}

#[test]
fn reference_config_file_matches_the_library_builder() {
    let manifest_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let path = manifest_dir.join("../../configs/reference_sim.json");
    let text = read(&path);
    let from_file = attn_core::sim::SimConfig::from_json(&text).unwrap();
    assert_eq!(from_file, attn_core::sim::reference_config(1));
}
