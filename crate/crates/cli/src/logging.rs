//! CSV artifacts: the per-epoch progress log and the curriculum goal dumps.
//!
//! Floats are written with Rust's shortest-round-trip formatting, so
//! parsing a log back yields bitwise the values that were logged, and two
//! identically seeded runs produce byte-identical files (wall time aside).

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::harness::{EpochReport, GoalDump};

pub const PROGRESS_HEADER: &str = "epoch,episodes,success_rate,critic_loss,actor_loss,epsilon,wall_s";

pub fn progress_csv(reports: &[EpochReport]) -> String {
    let mut s = String::with_capacity(64 * (reports.len() + 1));
    s.push_str(PROGRESS_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epoch, r.episodes, r.success_rate, r.critic_loss, r.actor_loss, r.epsilon, r.wall_s
        ));
    }
    s
}

pub fn write_progress(path: &Path, reports: &[EpochReport]) -> Result<(), CliError> {
    fs::write(path, progress_csv(reports)).map_err(|e| CliError::io(e, path))
}

/// Parse a progress log produced by [`write_progress`].
pub fn read_progress(path: &Path) -> Result<Vec<EpochReport>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(e, path))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == PROGRESS_HEADER => {}
        other => {
            return Err(CliError::runtime(format!(
                "{}: bad progress header {other:?}",
                path.display()
            )))
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(CliError::runtime(format!(
                "{}:{}: expected 7 fields, got {}",
                path.display(),
                idx + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            CliError::runtime(format!("{}:{}: bad {what}", path.display(), idx + 2))
        };
        out.push(EpochReport {
            epoch: fields[0].parse().map_err(|_| bad("epoch"))?,
            episodes: fields[1].parse().map_err(|_| bad("episodes"))?,
            success_rate: fields[2].parse().map_err(|_| bad("success_rate"))?,
            critic_loss: fields[3].parse().map_err(|_| bad("critic_loss"))?,
            actor_loss: fields[4].parse().map_err(|_| bad("actor_loss"))?,
            epsilon: fields[5].parse().map_err(|_| bad("epsilon"))?,
            wall_s: fields[6].parse().map_err(|_| bad("wall_s"))?,
        });
    }
    Ok(out)
}

/// Write one CSV per epoch that built a curriculum batch, under
/// `dir/goals/epoch_NNNN.csv`.
pub fn write_goal_dumps(dir: &Path, dumps: &[GoalDump]) -> Result<Vec<PathBuf>, CliError> {
    if dumps.is_empty() {
        return Ok(Vec::new());
    }
    let goals_dir = dir.join("goals");
    fs::create_dir_all(&goals_dir).map_err(|e| CliError::io(e, &goals_dir))?;
    let mut paths = Vec::with_capacity(dumps.len());
    for dump in dumps {
        let mut s = String::from("g0,g1,density,prob,entropy,in_pool\n");
        for row in &dump.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.goal[0],
                row.goal[1],
                row.density,
                row.prob,
                row.entropy,
                u8::from(row.in_pool)
            ));
        }
        let path = goals_dir.join(format!("epoch_{:04}.csv", dump.epoch));
        fs::write(&path, s).map_err(|e| CliError::io(e, &path))?;
        paths.push(path);
    }
    Ok(paths)
}
