use std::path::Path;
use std::process::{Command, Output};

use satpath_core::dynamics::validate_path;
use satpath_core::markov::CompiledKStep;
use satpath_core::{NormalFormGame64, PathRecord64};

fn satpath(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satpath"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_then_path_reaches_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    ok(&satpath(
        dir.path(),
        &["gen", "--named", "matching_pennies", "--out", "g.json"],
    ));
    let text = ok(&satpath(
        dir.path(),
        &["path", "--game", "g.json", "--start", "pure:0,0", "--epsilon", "1e-6"],
    ));
    let path: PathRecord64 = serde_json::from_str(&text).unwrap();
    assert!(path.terminal_is_equilibrium);
    let game: NormalFormGame64 =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert!(validate_path(&game, &path).unwrap());
    let last = path.profiles.last().unwrap();
    assert!(game.residual(last).unwrap() <= 1e-6);
}

#[test]
fn path_csv_lists_group_counts() {
    let dir = tempfile::tempdir().unwrap();
    ok(&satpath(
        dir.path(),
        &["gen", "--named", "rock_paper_scissors", "--out", "g.json"],
    ));
    let text = ok(&satpath(
        dir.path(),
        &["path", "--game", "g.json", "--start", "pure:0,1", "--format", "csv"],
    ));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,group_count,satisfied"));
    assert!(text.lines().last().unwrap().ends_with(",2,0 1"));
}

#[test]
fn eval_single_state_single_action() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("g.json"),
        r#"{"players":1,"states":1,"actions":[1],"transition":[[[1.0]]],"payoffs":[[[0.7]]],"discounts":[0.75]}"#,
    )
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&ok(&satpath(dir.path(), &["eval", "--game", "g.json"]))).unwrap();
    let value = v["values"][0][0].as_f64().unwrap();
    assert!((value - 0.7 / 0.25).abs() <= 1e-9, "{value}");
    assert_eq!(v["residual"].as_f64(), Some(0.0));
}

#[test]
fn malformed_game_exits_one_with_schema_hint() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"players": 2, "actions": [2, 2]"#).unwrap();
    let out = satpath(dir.path(), &["solve", "--game", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("\"payoffs\""), "{err}");

    std::fs::write(
        dir.path().join("short.json"),
        r#"{"players": 2, "actions": [2, 2], "payoffs": [1.0]}"#,
    )
    .unwrap();
    let out = satpath(dir.path(), &["solve", "--game", "short.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("normal-form game"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = satpath(dir.path(), &["gen", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(satpath(dir.path(), &["frobnicate"]).status.code(), Some(2));
    ok(&satpath(dir.path(), &["gen", "--out", "g.json"]));
    let out = satpath(dir.path(), &["solve", "--game", "g.json", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["gen", "--actions", "2,3,2", "--seed", "11"],
        vec![
            "gen",
            "--actions",
            "2,2",
            "--states",
            "3",
            "--gamma",
            "0.8",
            "--seed",
            "4",
        ],
        vec!["gen", "--actions", "2", "--states", "2", "--k", "2", "--seed", "4"],
    ] {
        let a = ok(&satpath(dir.path(), &args));
        let b = ok(&satpath(dir.path(), &args));
        assert_eq!(a, b);
    }
    let zero: serde_json::Value = serde_json::from_str(&ok(&satpath(
        dir.path(),
        &["gen", "--named", "all_zero", "--actions", "3,2,2"],
    )))
    .unwrap();
    let payoffs = zero["payoffs"].as_array().unwrap();
    assert_eq!(payoffs.len(), 36);
    assert!(payoffs.iter().all(|p| p.as_f64() == Some(0.0)));
}

#[test]
fn solve_compile_and_topology() {
    let dir = tempfile::tempdir().unwrap();
    ok(&satpath(
        dir.path(),
        &["gen", "--named", "matching_pennies", "--out", "mp.json"],
    ));
    let solved: serde_json::Value =
        serde_json::from_str(&ok(&satpath(dir.path(), &["solve", "--game", "mp.json"]))).unwrap();
    assert!(solved["residual"].as_f64().unwrap() <= 1e-6);

    ok(&satpath(
        dir.path(),
        &["gen", "--actions", "2", "--states", "2", "--out", "s.json"],
    ));
    let solved: serde_json::Value =
        serde_json::from_str(&ok(&satpath(dir.path(), &["solve", "--game", "s.json"]))).unwrap();
    assert_eq!(solved["method"], "mdp_greedy");

    let compiled: CompiledKStep<f64> = serde_json::from_str(&ok(&satpath(
        dir.path(),
        &["compile-kstep", "--game", "s.json", "--k", "1"],
    )))
    .unwrap();
    assert_eq!(compiled.game.num_states(), 4);
    let out = satpath(dir.path(), &["compile-kstep", "--game", "s.json"]);
    assert_eq!(out.status.code(), Some(2));

    let topo: serde_json::Value = serde_json::from_str(&ok(&satpath(
        dir.path(),
        &[
            "check-topology",
            "--game",
            "mp.json",
            "--profile",
            "uniform",
            "--epsilon",
            "0",
        ],
    )))
    .unwrap();
    assert_eq!(topo["group_count"], 2);
    assert_eq!(topo["local_minimum"]["verdict"], "certified_min");
}

#[test]
fn report_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"kind": "normal_form_path", "seeds": [2, 0, 1], "output": {"json": "r.json", "csv": "r.csv"}}"#,
    )
    .unwrap();
    let first = ok(&satpath(dir.path(), &["report", "--config", "cfg.json"]));
    let written = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    assert_eq!(first, written);
    let second = ok(&satpath(dir.path(), &["report", "--config", "cfg.json"]));
    assert_eq!(first, second);

    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    let seeds: Vec<u64> = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, vec![0, 1, 2]);
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("seed,kind,steps,residual,success,millis\n"));
    assert_eq!(csv.lines().count(), 4);

    std::fs::write(
        dir.path().join("empty.json"),
        r#"{"kind": "normal_form_path", "seeds": []}"#,
    )
    .unwrap();
    let out = satpath(dir.path(), &["report", "--config", "empty.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeds must be nonempty"));
}
