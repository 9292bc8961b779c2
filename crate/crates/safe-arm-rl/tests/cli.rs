//! End-to-end command-line behavior.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_safe-arm-rl"))
}

#[test]
fn train_without_config_flag_prints_usage_and_fails() {
    let out = bin().arg("train").output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--config"), "stderr: {stderr}");
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn train_with_nonexistent_config_fails_cleanly() {
    let out = bin()
        .args(["train", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot read config"), "stderr: {stderr}");
}

#[test]
fn gradcheck_exits_zero_on_fresh_build() {
    let out = bin().arg("gradcheck").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert_eq!(stdout.matches("PASS").count(), 4, "stdout: {stdout}");
}

#[test]
fn simcheck_exits_zero_on_fresh_build() {
    let out = bin().arg("simcheck").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert_eq!(stdout.matches("PASS").count(), 3, "stdout: {stdout}");
}

#[test]
fn summarize_reproduces_the_golden_table() {
    // summarize writes into the runs dir, so work on a copy of the fixtures
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    std::fs::create_dir_all(&runs).unwrap();
    for entry in std::fs::read_dir(fixtures.join("runs")).unwrap() {
        let dir = entry.unwrap().path();
        let dest = runs.join(dir.file_name().unwrap());
        std::fs::create_dir_all(&dest).unwrap();
        std::fs::copy(dir.join("report.json"), dest.join("report.json")).unwrap();
    }

    let out = bin()
        .args(["summarize", "--window", "2", "--runs"])
        .arg(&runs)
        .output()
        .unwrap();
    assert!(out.status.success());

    let produced = std::fs::read(runs.join("summary.csv")).unwrap();
    let golden = std::fs::read(fixtures.join("golden_summary.csv")).unwrap();
    assert_eq!(produced, golden, "summary.csv deviates from the golden file");

    for file in ["reward_curves.csv", "cost_curves.csv", "reward_curves.svg", "cost_curves.svg"] {
        assert!(runs.join(file).exists(), "missing {file}");
    }
}

#[test]
fn worker_cap_does_not_change_results() {
    // seeds fan out across workers; scheduling must not affect the logs
    let tmp = tempfile::tempdir().unwrap();
    let config_path = tmp.path().join("tiny.json");
    std::fs::write(
        &config_path,
        r#"{
            "env": {"action_repr": "ar1", "max_episode_steps": 40},
            "trainer": {"algorithm": "ppo", "steps_per_epoch": 80, "max_epochs": 2,
                        "update_passes": 2, "hidden_sizes": [8, 8]},
            "seeds": [1, 2],
            "desk_scale": true
        }"#,
    )
    .unwrap();
    let run = |out: &Path, threads: &str| {
        let status = bin()
            .env("SAFE_ARM_RL_THREADS", threads)
            .args(["train", "--quiet", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(out.join("ppo_ar1_seed1/metrics.csv")).unwrap(),
            std::fs::read(out.join("ppo_ar1_seed2/metrics.csv")).unwrap(),
        )
    };
    let serial = run(&tmp.path().join("serial"), "1");
    let parallel = run(&tmp.path().join("parallel"), "2");
    assert_eq!(serial, parallel);
}

#[test]
fn summarize_empty_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin().args(["summarize", "--runs"]).arg(tmp.path()).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn summarize_reproduces_the_shipped_desk_summary() {
    // the committed desk-scale results must round-trip through summarize
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../results/desk");
    if !shipped.exists() {
        panic!("shipped desk results missing at {}", shipped.display());
    }
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    std::fs::create_dir_all(&runs).unwrap();
    for entry in std::fs::read_dir(&shipped).unwrap() {
        let dir = entry.unwrap().path();
        if dir.is_dir() {
            let dest = runs.join(dir.file_name().unwrap());
            std::fs::create_dir_all(&dest).unwrap();
            std::fs::copy(dir.join("report.json"), dest.join("report.json")).unwrap();
        }
    }
    let out = bin()
        .args(["summarize", "--window", "10", "--runs"])
        .arg(&runs)
        .output()
        .unwrap();
    assert!(out.status.success());
    let produced = std::fs::read(runs.join("summary.csv")).unwrap();
    let golden = std::fs::read(shipped.join("summary.csv")).unwrap();
    assert_eq!(produced, golden, "shipped summary.csv is stale");
}
