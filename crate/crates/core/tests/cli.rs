use std::path::Path;
use std::process::{Command, Output};

fn ehbcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehbcast")).args(args).output().expect("spawn ehbcast")
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_single_link_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehbcast(&[
        "solve",
        "--scenario",
        &data("single_link.json"),
        "--alloc",
        "optimal",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stairs = std::fs::read_to_string(dir.path().join("staircase.csv")).unwrap();
    let mut lines = stairs.lines();
    assert_eq!(lines.next(), Some("breakpoint_s,level_mw"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-9);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!((summary["completion_s"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    for f in ["allocation.csv", "switching.csv"] {
        assert!(dir.path().join(f).exists());
    }
}

#[test]
fn solve_two_receivers_reports_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let out = ehbcast(&[
        "solve",
        "--scenario",
        &data("two_receivers.json"),
        "--alloc",
        "optimal",
        "--out-dir",
        path(dir.path()),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!((summary["cutoffs_mw"][0].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn every_allocation_flag_is_accepted() {
    for alloc in ["proposed", "optimal", "ep", "dr", "rdr"] {
        let dir = tempfile::tempdir().unwrap();
        let out = ehbcast(&[
            "solve",
            "--scenario",
            &data("golden_scenario.json"),
            "--alloc",
            alloc,
            "--out-dir",
            path(dir.path()),
        ]);
        assert!(out.status.success(), "{alloc}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let out = ehbcast(&[
        "solve",
        "--scenario",
        &data("golden_scenario.json"),
        "--alloc",
        "greedy",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_scenario_exits_with_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"bandwidth_hz": 1e6, "transmitters": [{"id": 1, "initial_energy_mj": 1.0}],
            "receivers": [{"id": 1, "bitz": 5}], "channel": {"path_loss_db": [[0]], "noise_psd": [[1e-9]]}}"#,
    )
    .unwrap();
    let out = ehbcast(&["solve", "--scenario", path(&bad), "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bits") || err.contains("bitz"), "{err}");
}

#[test]
fn invalid_scenario_values_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("neg.json");
    std::fs::write(
        &bad,
        r#"{"bandwidth_hz": 1e6, "transmitters": [{"id": 1, "initial_energy_mj": -1.0}],
            "receivers": [{"id": 1, "bits": 5}], "channel": {"path_loss_db": [[0]], "noise_psd": [[1e-9]]}}"#,
    )
    .unwrap();
    let out = ehbcast(&["solve", "--scenario", path(&bad), "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unservable_demand_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let starved = dir.path().join("starved.json");
    std::fs::write(
        &starved,
        r#"{"bandwidth_hz": 1e6, "transmitters": [{"id": 1, "initial_energy_mj": 0.0}],
            "receivers": [{"id": 1, "bits": 5}], "channel": {"path_loss_db": [[0]], "noise_psd": [[1e-9]]}}"#,
    )
    .unwrap();
    let out = ehbcast(&["solve", "--scenario", path(&starved), "--out-dir", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_then_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    let out = ehbcast(&[
        "gen",
        "--params",
        &data("baseline_params.json"),
        "--seed",
        "4",
        "--horizon",
        "40",
        "--out",
        path(&scenario),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again = dir.path().join("s2.json");
    ehbcast(&["gen", "--seed", "4", "--horizon", "40", "--out", path(&again)]);
    assert_eq!(std::fs::read(&scenario).unwrap(), std::fs::read(&again).unwrap());
    let out = ehbcast(&["solve", "--scenario", path(&scenario), "--out-dir", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_and_sweep_headers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    assert!(ehbcast(&["bench", "--table", "1", "--runs", "5", "--seed", "3", "--out", path(&csv)]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("policy,runs,mean,stddev,stderr,seed\n"));
    assert_eq!(text.lines().count(), 5);

    assert!(ehbcast(&["sweep-bits", "--multiples", "1,2", "--runs", "3", "--out", path(&csv)]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("multiple,mean_rel_dev,stderr\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn bad_harness_arguments_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    assert_eq!(ehbcast(&["bench", "--table", "1", "--runs", "0", "--out", path(&csv)]).status.code(), Some(1));
    assert_eq!(
        ehbcast(&["sweep-bits", "--multiples", "0..3", "--runs", "2", "--out", path(&csv)]).status.code(),
        Some(1)
    );
    assert_eq!(ehbcast(&["gen", "--horizon", "-1", "--out", path(&csv)]).status.code(), Some(1));
}
