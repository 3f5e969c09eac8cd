//! Run configuration: defaults, the flat `key = value` config file format,
//! and merging of CLI overrides. Precedence is defaults < file < flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use herd_core::agent::AgentConfig;
use herd_core::curriculum::CurriculumConfig;
use herd_core::replay::{RelabelSpec, DEFAULT_GOAL_CAPACITY, DEFAULT_TRANSITION_CAPACITY};

use crate::error::CliError;

/// Everything a training run depends on. Identical configs (same seed)
/// produce byte-identical progress logs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub seed: u64,
    pub epochs: usize,
    pub episodes_per_epoch: usize,
    pub eval_episodes: usize,
    pub updates_per_epoch: usize,
    /// Size of the hindsight-relabeled slice of each update batch.
    pub batch_size: usize,
    /// Curriculum-goal transitions appended on top of `batch_size` when
    /// transition augmentation is on.
    pub aug_batch: usize,
    /// Episode-collection fan-out. Results are identical for any value
    /// because episodes are seeded individually, not per worker.
    pub workers: usize,
    /// Exploration-goal replacement at episode start.
    pub curriculum: bool,
    /// Ball-noise augmentation of selected goals.
    pub goal_aug: bool,
    /// Curriculum-goal transition augmentation in update batches.
    pub trans_aug: bool,
    pub buffer_capacity: usize,
    pub goal_capacity: usize,
    pub curriculum_cfg: CurriculumConfig,
    pub relabel: RelabelSpec,
    pub agent: AgentConfig,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            env: String::new(),
            seed: 1,
            epochs: 50,
            episodes_per_epoch: 64,
            eval_episodes: 20,
            updates_per_epoch: 60,
            batch_size: 512,
            aug_batch: 128,
            workers: 1,
            curriculum: true,
            goal_aug: true,
            trans_aug: true,
            buffer_capacity: DEFAULT_TRANSITION_CAPACITY,
            goal_capacity: DEFAULT_GOAL_CAPACITY,
            curriculum_cfg: CurriculumConfig::default(),
            relabel: RelabelSpec::default(),
            agent: AgentConfig::default(),
            out: None,
        }
    }
}

impl RunConfig {
    /// Structural checks that don't need the environment (the env-dependent
    /// ones, like aug_radius <= delta, run when training starts).
    pub fn validate(&self) -> Result<(), CliError> {
        if self.env.is_empty() {
            return Err(CliError::config("no environment selected (use --env or `env =` in a config file)"));
        }
        for (name, v) in [
            ("epochs", self.epochs),
            ("episodes_per_epoch", self.episodes_per_epoch),
            ("eval_episodes", self.eval_episodes),
            ("updates_per_epoch", self.updates_per_epoch),
            ("batch_size", self.batch_size),
            ("workers", self.workers),
            ("buffer_capacity", self.buffer_capacity),
            ("goal_capacity", self.goal_capacity),
        ] {
            if v == 0 {
                return Err(CliError::config(format!("{name} must be at least 1")));
            }
        }
        self.agent.validate().map_err(CliError::from)?;
        Ok(())
    }

    /// Parse a config file into `self`, overriding current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(e, path))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    idx + 1
                ))
            })?;
            self.apply_kv(key.trim(), value.trim()).map_err(|e| {
                CliError::config(format!("{}:{}: {e}", path.display(), idx + 1))
            })?;
        }
        Ok(())
    }

    /// Set one configuration key from its text form.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "env" => self.env = value.to_string(),
            "seed" => self.seed = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "episodes_per_epoch" => self.episodes_per_epoch = parse(key, value)?,
            "eval_episodes" => self.eval_episodes = parse(key, value)?,
            "updates_per_epoch" => self.updates_per_epoch = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "aug_batch" => self.aug_batch = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "curriculum" => self.curriculum = parse_switch(value)?,
            "goal_aug" => self.goal_aug = parse_switch(value)?,
            "trans_aug" => self.trans_aug = parse_switch(value)?,
            "buffer_capacity" => self.buffer_capacity = parse(key, value)?,
            "goal_capacity" => self.goal_capacity = parse(key, value)?,
            "select_size" => self.curriculum_cfg.select_size = parse(key, value)?,
            "augment_size" => self.curriculum_cfg.augment_size = parse(key, value)?,
            "pool_size" => self.curriculum_cfg.pool_size = parse(key, value)?,
            "aug_radius" => self.curriculum_cfg.aug_radius = parse(key, value)?,
            "alpha" => self.curriculum_cfg.alpha = parse(key, value)?,
            "replay_k" => self.relabel.replay_k = parse(key, value)?,
            "hidden" => self.agent.hidden = parse_hidden(value)?,
            "actor_lr" => self.agent.actor_lr = parse(key, value)?,
            "critic_lr" => self.agent.critic_lr = parse(key, value)?,
            "gamma" => self.agent.gamma = parse(key, value)?,
            "polyak" => self.agent.polyak = parse(key, value)?,
            "action_noise" => self.agent.action_noise = parse(key, value)?,
            "random_action_prob" => self.agent.random_action_prob = parse(key, value)?,
            "action_l2" => self.agent.action_l2 = parse(key, value)?,
            "normalizer_floor" => self.agent.normalizer_floor = parse(key, value)?,
            "normalizer_clip" => self.agent.normalizer_clip = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(CliError::config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Render as a config file that reproduces this run exactly.
    pub fn to_file_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "env = {}", self.env);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "episodes_per_epoch = {}", self.episodes_per_epoch);
        let _ = writeln!(s, "eval_episodes = {}", self.eval_episodes);
        let _ = writeln!(s, "updates_per_epoch = {}", self.updates_per_epoch);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "aug_batch = {}", self.aug_batch);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "curriculum = {}", onoff(self.curriculum));
        let _ = writeln!(s, "goal_aug = {}", onoff(self.goal_aug));
        let _ = writeln!(s, "trans_aug = {}", onoff(self.trans_aug));
        let _ = writeln!(s, "buffer_capacity = {}", self.buffer_capacity);
        let _ = writeln!(s, "goal_capacity = {}", self.goal_capacity);
        let _ = writeln!(s, "select_size = {}", self.curriculum_cfg.select_size);
        let _ = writeln!(s, "augment_size = {}", self.curriculum_cfg.augment_size);
        let _ = writeln!(s, "pool_size = {}", self.curriculum_cfg.pool_size);
        let _ = writeln!(s, "aug_radius = {}", self.curriculum_cfg.aug_radius);
        let _ = writeln!(s, "alpha = {}", self.curriculum_cfg.alpha);
        let _ = writeln!(s, "replay_k = {}", self.relabel.replay_k);
        let hidden: Vec<String> = self.agent.hidden.iter().map(|h| h.to_string()).collect();
        let _ = writeln!(s, "hidden = {}", hidden.join(","));
        let _ = writeln!(s, "actor_lr = {}", self.agent.actor_lr);
        let _ = writeln!(s, "critic_lr = {}", self.agent.critic_lr);
        let _ = writeln!(s, "gamma = {}", self.agent.gamma);
        let _ = writeln!(s, "polyak = {}", self.agent.polyak);
        let _ = writeln!(s, "action_noise = {}", self.agent.action_noise);
        let _ = writeln!(s, "random_action_prob = {}", self.agent.random_action_prob);
        let _ = writeln!(s, "action_l2 = {}", self.agent.action_l2);
        let _ = writeln!(s, "normalizer_floor = {}", self.agent.normalizer_floor);
        let _ = writeln!(s, "normalizer_clip = {}", self.agent.normalizer_clip);
        s
    }
}

fn onoff(v: bool) -> &'static str {
    if v {
        "on"
    } else {
        "off"
    }
}

/// Accepts on/off, true/false, 1/0.
pub fn parse_switch(value: &str) -> Result<bool, CliError> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(CliError::config(format!("expected on|off, got `{other}`"))),
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::config(format!("bad value for {key}: `{value}` ({e})")))
}

fn parse_hidden(value: &str) -> Result<Vec<usize>, CliError> {
    let layers: Result<Vec<usize>, _> =
        value.split(',').map(|p| p.trim().parse::<usize>()).collect();
    layers.map_err(|e| CliError::config(format!("bad hidden layer list `{value}` ({e})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn file_values_override_defaults() {
        let f = write_temp(
            "# a comment\n\
             env = push_gap\n\
             seed = 7\n\
             curriculum = off   # trailing comment\n\
             alpha = 0.4\n\
             hidden = 32, 16\n",
        );
        let mut cfg = RunConfig::default();
        cfg.apply_file(f.path()).unwrap();
        assert_eq!(cfg.env, "push_gap");
        assert_eq!(cfg.seed, 7);
        assert!(!cfg.curriculum);
        assert_eq!(cfg.curriculum_cfg.alpha, 0.4);
        assert_eq!(cfg.agent.hidden, vec![32, 16]);
        // Untouched keys keep their defaults.
        assert_eq!(cfg.epochs, 50);
    }

    #[test]
    fn emitted_config_round_trips() {
        let mut cfg = RunConfig { env: "throw".into(), seed: 99, ..RunConfig::default() };
        cfg.trans_aug = false;
        cfg.agent.gamma = 0.95;
        let f = write_temp(&cfg.to_file_text());
        let mut back = RunConfig::default();
        back.apply_file(f.path()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_kv("turbo", "on").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = cfg.apply_kv("epochs", "many").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let f = write_temp("this line has no equals sign\n");
        let err = cfg.apply_file(f.path()).unwrap_err();
        assert!(err.to_string().contains(":1:"));
    }

    #[test]
    fn zero_sizes_fail_validation() {
        let mut cfg = RunConfig { env: "point_reach".into(), ..RunConfig::default() };
        cfg.epochs = 0;
        assert!(cfg.validate().is_err());
        cfg.epochs = 1;
        cfg.validate().unwrap();
    }

    #[test]
    fn switch_parsing_accepts_the_documented_spellings() {
        for s in ["on", "true", "1", "ON"] {
            assert!(parse_switch(s).unwrap());
        }
        for s in ["off", "false", "0", "Off"] {
            assert!(!parse_switch(s).unwrap());
        }
        assert!(parse_switch("maybe").is_err());
    }
}
