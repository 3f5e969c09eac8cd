//! End-to-end runs of the `herd` binary through its real argv interface.

use std::process::{Command, Output};

fn herd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_herd"))
        .args(args)
        .output()
        .expect("failed to launch the herd binary")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const TINY: &[&str] = &[
    "--episodes",
    "8",
    "--eval-episodes",
    "4",
    "--updates",
    "2",
    "--batch-size",
    "32",
];

#[test]
fn train_smoke_writes_artifacts_and_two_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let mut args = vec!["train", "--env", "point_reach", "--epochs", "2", "--seed", "1"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&["--out", run.to_str().unwrap()]);
    let out = herd(&args);
    assert!(out.status.success(), "stderr: {}", text(&out.stderr));
    let csv = std::fs::read_to_string(run.join("progress.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epoch,episodes,success_rate,critic_loss,actor_loss,epsilon,wall_s"
    );
    assert_eq!(lines.count(), 2);
    for name in ["curve.svg", "final.agent", "config.txt"] {
        assert!(run.join(name).exists(), "{name} missing");
    }
}

#[test]
fn eval_round_trips_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let mut args = vec!["train", "--env", "point_reach", "--epochs", "1"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(&["--out", run.to_str().unwrap()]);
    assert!(herd(&args).status.success());

    let ckpt = run.join("final.agent");
    let out = herd(&[
        "eval",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--env",
        "point_reach",
        "--episodes",
        "4",
    ]);
    assert!(out.status.success(), "stderr: {}", text(&out.stderr));
    assert!(text(&out.stdout).contains("success rate"));

    // Same checkpoint against an environment with different shapes.
    let out = herd(&["eval", "--checkpoint", ckpt.to_str().unwrap(), "--env", "throw"]);
    assert_eq!(out.status.code(), Some(2), "dimension mismatch must be a config error");
}

#[test]
fn unknown_environment_exits_2() {
    let out = herd(&["train", "--env", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("nosuch"));
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let out = herd(&["train", "--env", "point_reach", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr).to_lowercase();
    assert!(err.contains("usage") || err.contains("unexpected"), "got: {err}");
}

#[test]
fn config_file_applies_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# smoke settings\n\
         env = point_reach\n\
         epochs = 1\n\
         episodes_per_epoch = 8\n\
         eval_episodes = 4\n\
         updates_per_epoch = 2\n\
         batch_size = 32\n",
    )
    .unwrap();
    let run = dir.path().join("run");
    let out = herd(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--epochs",
        "2",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", text(&out.stderr));
    let csv = std::fs::read_to_string(run.join("progress.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "--epochs 2 must override the file's epochs = 1");
}

#[test]
fn compare_emits_a_summary_row_per_seed() {
    let out = herd(&["compare", "--env", "point_reach", "--seeds", "7", "--epochs", "1"]);
    assert!(out.status.success(), "stderr: {}", text(&out.stderr));
    let table = text(&out.stdout);
    assert!(table.contains("seed 7: full"), "missing per-seed row: {table}");
    assert!(table.contains("mean over 1 seeds"), "missing summary: {table}");
}
