mod common;

use std::process::Command;

fn lyricar() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lyricar"))
}

#[test]
fn ingest_and_dry_run_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, "one line / two line\n\nthree\n").unwrap();
    let out = dir.path().join("out.jsonl");
    let st = lyricar().args(["ingest", "--input"]).arg(&input).arg("--output").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);

    let st = lyricar().args(["train", "--dry-run", "--config"]).arg(common::fixture("toy.toml")).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(String::from_utf8_lossy(&st.stdout).contains("0 steps"));
}

#[test]
fn bad_config_exits_non_zero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[grpo]\nlearning_rates = [0.1]\n").unwrap();
    let st = lyricar().args(["train", "--config"]).arg(&cfg).output().unwrap();
    assert!(!st.status.success());
    let err = String::from_utf8_lossy(&st.stderr);
    assert!(err.contains("error:") && err.contains("bad.toml"), "{err}");
}

#[test]
fn score_without_config_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pairs.jsonl");
    std::fs::write(&input, "{\"source\": \"the moon is bright / the night is long\", \"candidate\": \"月亮明光 / 夜晚很长\"}\n").unwrap();
    let out = dir.path().join("scores.jsonl");
    let st = lyricar().args(["score", "--input"]).arg(&input).arg("--output").arg(&out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let row: serde_json::Value = serde_json::from_str(std::fs::read_to_string(&out).unwrap().trim()).unwrap();
    assert_eq!(row["total"], 1.0);
}
