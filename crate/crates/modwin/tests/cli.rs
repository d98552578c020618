//! End-to-end checks of the command-line surface: canonical round-trips,
//! seeded replay, and exit codes.

use std::process::{Command, Output};

fn modwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modwin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn scenario_emission_and_roundtrip() {
    let out = modwin(&["scenario", "five-user"]);
    assert!(out.status.success());
    let json = stdout(&out);
    assert!(json.contains("\"initial_adopters\""));

    // Loading and re-emitting is byte-identical.
    let dir = std::env::temp_dir().join(format!("modwin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pop.json");
    std::fs::write(&path, &json).unwrap();
    let first = modwin(&["lcc", "--input", path.to_str().unwrap()]);
    assert!(first.status.success());

    let emitted = modwin(&["scenario", "five-user", "--emit", path.to_str().unwrap()]);
    assert!(emitted.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), json.trim_end_matches('\n'));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lcc_five_user_members() {
    let out = modwin(&["lcc", "--scenario", "five-user"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["size"], 3);
    assert_eq!(doc["members"], serde_json::json!([0, 1, 2]));
}

#[test]
fn fair_limit_five_user_window() {
    let out = modwin(&["fair-limit", "--scenario", "five-user", "--window", "2", "5"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["min_size"], 3);
}

#[test]
fn simulate_csv_contract_and_oscillation() {
    let out = modwin(&[
        "simulate",
        "--scenario",
        "cycling-single",
        "--n",
        "20",
        "--schedule",
        "blocks",
        "--horizon",
        "400",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,phase,actor,action,size");
    let sizes: Vec<usize> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(sizes.len(), 400);
    // The size column oscillates: both leaves and joins appear late in the
    // run, and no stable plateau forms.
    let tail = &sizes[200..];
    let min = tail.iter().min().unwrap();
    let max = tail.iter().max().unwrap();
    assert!(min < max, "trace stabilized unexpectedly");
}

#[test]
fn seeded_commands_replay_identically() {
    let a = modwin(&[
        "simulate", "--scenario", "mutual-random", "--n", "9", "--scenario-seed", "4",
        "--schedule", "seeded", "--seed", "11", "--horizon", "120",
    ]);
    let b = modwin(&[
        "simulate", "--scenario", "mutual-random", "--n", "9", "--scenario-seed", "4",
        "--schedule", "seeded", "--seed", "11", "--horizon", "120",
    ]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let c = modwin(&[
        "sample-window", "--scenario", "theta-upper-bound", "--theta", "3/4", "--n", "100",
        "--m", "20", "--seed", "7",
    ]);
    let d = modwin(&[
        "sample-window", "--scenario", "theta-upper-bound", "--theta", "3/4", "--n", "100",
        "--m", "20", "--seed", "7",
    ]);
    assert_eq!(stdout(&c), stdout(&d));
}

#[test]
fn exit_codes() {
    // Malformed JSON: validation failure, exit 2, message carries position.
    let dir = std::env::temp_dir().join(format!("modwin-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\"users\": [}").unwrap();
    let out = modwin(&["lcc", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line") && err.contains("column"), "{err}");

    // Invalid population: exit 2.
    std::fs::write(
        &path,
        r#"{"users":[{"l":"5","p":"1","r":"9","theta":"1"}],"initial_adopters":[]}"#,
    )
    .unwrap();
    let out = modwin(&["lcc", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Engine cap exceeded: exit 3.
    let out = modwin(&[
        "fair-limit",
        "--scenario",
        "mutual-random",
        "--n",
        "18",
        "--max-eligible",
        "15",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("quotient"), "{err}");

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn state_cap_env_var_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_modwin"))
        .args(["fair-limit", "--scenario", "cycling-single", "--n", "20"])
        .env("MODWIN_STATE_CAP", "10")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("state cap"), "{err}");
}

#[test]
fn window_opt_parallel_matches_serial() {
    let serial = modwin(&["window-opt", "--scenario", "adversaries-example"]);
    let parallel = modwin(&[
        "window-opt",
        "--scenario",
        "adversaries-example",
        "--jobs",
        "4",
    ]);
    assert!(serial.status.success());
    assert_eq!(stdout(&serial), stdout(&parallel));
}

#[test]
fn robust_cli_matches_known_values() {
    let out = modwin(&[
        "robust",
        "--scenario",
        "adversaries-example",
        "--k",
        "1",
        "--window",
        "1",
        "7",
        "--jobs",
        "2",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["robust_size"], 6);
}

#[test]
fn compete_quotient_report() {
    let out = modwin(&["compete", "--scenario", "insurgency", "--n", "40"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["per_platform_min_sizes"].is_array());
    assert!(doc["equilibria"].as_array().unwrap().len() >= 2);
}

#[test]
fn freq_expand_cli() {
    let dir = std::env::temp_dir().join(format!("modwin-cli-freq-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("freq.json");
    std::fs::write(
        &path,
        r#"{"users":[
            {"l":"0","p":"1","r":"2","theta":"1/4","f":2},
            {"l":"0","p":"1","r":"2","theta":"1/4","f":1},
            {"l":"0","p":"2","r":"2","theta":"1/4","f":1}
        ],"initial_adopters":[0]}"#,
    )
    .unwrap();
    let out = modwin(&["freq-expand", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let users = doc["users"].as_array().unwrap();
    assert_eq!(users.len(), 4);
    assert_eq!(users[0]["theta"], "7/12");
    // Both copies of the adopter are adopters.
    assert_eq!(doc["initial_adopters"], serde_json::json!([0, 1]));
    std::fs::remove_dir_all(&dir).ok();
}
