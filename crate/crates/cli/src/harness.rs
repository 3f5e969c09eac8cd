//! The training loop.
//!
//! Each epoch: fit density models over the goal buffers, build the
//! curriculum batch, collect episodes (replacing desired goals with
//! exploration goals at rate ε when the curriculum is on), store and
//! absorb the trajectories, run a fixed number of gradient updates on
//! hindsight-relabeled (plus optionally curriculum-augmented) batches,
//! then evaluate the deterministic policy against true environment goals.
//! The measured success rate feeds the next epoch's ε.
//!
//! Determinism: every random decision draws from a generator seeded by
//! (run seed, stream, epoch, index), so runs are reproducible byte for
//! byte and episode collection can fan out across worker threads without
//! changing results.

use std::path::Path;
use std::time::Instant;

use herd_core::agent::DdpgAgent;
use herd_core::curriculum::{
    build_batch, density_priorities, maybe_replace_goal, CurriculumBatch, CurriculumConfig,
    ExploreSchedule,
};
use herd_core::envs::{by_name, episode_succeeded, rollout, Episode, GoalEnv};
use herd_core::kde::DensityModel;
use herd_core::replay::{
    augment_transitions, compose_update_batch, sample_her_batch, store_trajectory, GoalBuffer,
    TransitionBuffer,
};
use herd_core::seeding::{self, Stream};
use herd_core::types::{Action, Goal, State};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{checkpoint, logging, plot};

/// One epoch's diagnostics; serialized to `progress.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Training episodes collected this epoch.
    pub episodes: usize,
    /// Evaluation success rate against true environment goals.
    pub success_rate: f64,
    pub critic_loss: f64,
    pub actor_loss: f64,
    /// Goal-replacement probability used for this epoch's collection.
    pub epsilon: f64,
    pub wall_s: f64,
}

/// Call-count instrumentation: proves each ablation flag gates exactly its
/// own code path (a disabled flag leaves its counters at zero).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Curriculum batches built (zero when curriculum and trans-aug are off).
    pub curriculum_batches: u64,
    /// Episodes whose desired goal was replaced by an exploration goal.
    pub goals_replaced: u64,
    /// Goals created by ball-noise augmentation.
    pub goals_augmented: u64,
    /// Hindsight-relabeled transitions consumed by updates.
    pub her_transitions: u64,
    /// Curriculum-augmented transitions consumed by updates.
    pub aug_transitions: u64,
}

/// Per-goal diagnostics for one epoch's curriculum batch.
#[derive(Clone, Debug)]
pub struct GoalDumpRow {
    pub goal: Vec<f64>,
    /// Achieved-goal KDE density at this goal.
    pub density: f64,
    /// Density-priority selection probability within the batch union.
    pub prob: f64,
    /// Normalized entropy score within the batch union.
    pub entropy: f64,
    /// Whether the goal made the exploration pool.
    pub in_pool: bool,
}

#[derive(Clone, Debug)]
pub struct GoalDump {
    pub epoch: usize,
    pub rows: Vec<GoalDumpRow>,
}

pub struct RunResult {
    pub reports: Vec<EpochReport>,
    pub stats: RunStats,
    pub agent: DdpgAgent,
    pub goal_dumps: Vec<GoalDump>,
}

impl RunResult {
    /// Success rate of the last epoch.
    pub fn final_success(&self) -> f64 {
        self.reports.last().map(|r| r.success_rate).unwrap_or(0.0)
    }
}

/// Run a full training job described by `cfg`.
pub fn train(cfg: &RunConfig) -> Result<RunResult, CliError> {
    train_with(cfg, |_| {})
}

/// [`train`], invoking `on_epoch` after each epoch (progress printing).
pub fn train_with(
    cfg: &RunConfig,
    mut on_epoch: impl FnMut(&EpochReport),
) -> Result<RunResult, CliError> {
    cfg.validate()?;
    let env = by_name(&cfg.env)?;
    // The effective curriculum config: goal augmentation off empties the
    // augmentation slot but leaves selection and ranking untouched.
    let mut ccfg = cfg.curriculum_cfg.clone();
    if !cfg.goal_aug {
        ccfg.augment_size = 0;
    }
    if cfg.curriculum || cfg.trans_aug || cfg.goal_aug {
        ccfg.validate(env.reward_spec().delta)?;
    }
    let mut init_rng = seeding::rng(cfg.seed, Stream::Init, 0, 0);
    let agent = DdpgAgent::new(env.dims(), cfg.agent.clone(), &mut init_rng)?;
    let mut trainer = Trainer {
        cfg,
        ccfg,
        env,
        agent,
        trans: TransitionBuffer::new(cfg.buffer_capacity)?,
        ag_goals: GoalBuffer::new(cfg.goal_capacity)?,
        dg_goals: GoalBuffer::new(cfg.goal_capacity)?,
        dg_scratch: GoalBuffer::new(1)?,
        sched: ExploreSchedule::new(cfg.curriculum_cfg.alpha)?,
        stats: RunStats::default(),
        dumps: Vec::new(),
    };
    let mut reports = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let report = trainer.run_epoch(epoch)?;
        on_epoch(&report);
        reports.push(report);
    }
    Ok(RunResult {
        reports,
        stats: trainer.stats,
        agent: trainer.agent,
        goal_dumps: trainer.dumps,
    })
}

struct Trainer<'a> {
    cfg: &'a RunConfig,
    ccfg: CurriculumConfig,
    env: Box<dyn GoalEnv>,
    agent: DdpgAgent,
    trans: TransitionBuffer,
    ag_goals: GoalBuffer,
    dg_goals: GoalBuffer,
    /// Absorbs the behavioral goal of replaced episodes so `dg_goals` only
    /// ever sees goals the environment itself posed.
    dg_scratch: GoalBuffer,
    sched: ExploreSchedule,
    stats: RunStats,
    dumps: Vec<GoalDump>,
}

impl Trainer<'_> {
    fn run_epoch(&mut self, epoch: usize) -> Result<EpochReport, CliError> {
        let t0 = Instant::now();
        let epsilon = self.sched.epsilon();
        let batch = self.build_curriculum(epoch)?;
        let episodes = self.collect(epoch, batch.as_ref())?;
        for ep in episodes {
            self.agent.observe_episode(&ep.trajectory);
            let replaced = ep.trajectory.desired_goal != ep.env_goal;
            if replaced {
                self.stats.goals_replaced += 1;
                // The desired-goal density model must keep tracking the
                // task's own goal distribution. Feeding it the exploration
                // goals we just invented would make the entropy ranking
                // chase its own tail: each epoch's pool would raise the
                // modeled density wherever the previous pool sat, and the
                // curriculum drifts away from the task region.
                self.dg_goals.push(ep.env_goal.clone());
                store_trajectory(
                    &mut self.trans,
                    &mut self.ag_goals,
                    &mut self.dg_scratch,
                    ep.trajectory,
                )?;
            } else {
                store_trajectory(
                    &mut self.trans,
                    &mut self.ag_goals,
                    &mut self.dg_goals,
                    ep.trajectory,
                )?;
            }
        }
        let (critic_loss, actor_loss) = self.update_phase(epoch, batch.as_ref())?;
        let success_rate = evaluate(
            &self.agent,
            self.env.as_mut(),
            self.cfg.eval_episodes,
            self.cfg.seed,
            epoch as u64,
        )?;
        self.sched.record_success_rate(success_rate)?;
        Ok(EpochReport {
            epoch,
            episodes: self.cfg.episodes_per_epoch,
            success_rate,
            critic_loss,
            actor_loss,
            epsilon,
            wall_s: t0.elapsed().as_secs_f64(),
        })
    }

    /// Fit both KDEs and assemble the epoch's goal batch. Returns `None`
    /// while warming up (fewer than two distinct goals in either buffer)
    /// or when no enabled feature needs goals.
    fn build_curriculum(&mut self, epoch: usize) -> Result<Option<CurriculumBatch>, CliError> {
        if !(self.cfg.curriculum || self.cfg.trans_aug)
            || !self.ag_goals.has_two_distinct()
            || !self.dg_goals.has_two_distinct()
        {
            return Ok(None);
        }
        let achieved = self.ag_goals.to_vec();
        let ag_model = DensityModel::fit(&achieved)?;
        let dg_model = DensityModel::fit(&self.dg_goals.to_vec())?;
        let mut rng = seeding::rng(self.cfg.seed, Stream::Curriculum, epoch as u64, 0);
        let batch = build_batch(&achieved, &ag_model, &dg_model, &self.ccfg, &mut rng)?;
        self.stats.curriculum_batches += 1;
        self.stats.goals_augmented += batch.augmented.len() as u64;
        self.dumps.push(make_dump(epoch, &batch, &ag_model)?);
        Ok(Some(batch))
    }

    fn collect(
        &mut self,
        epoch: usize,
        batch: Option<&CurriculumBatch>,
    ) -> Result<Vec<Episode>, CliError> {
        let n = self.cfg.episodes_per_epoch;
        if self.cfg.workers <= 1 {
            let mut out = Vec::with_capacity(n);
            for e in 0..n {
                out.push(collect_episode(
                    self.env.as_mut(),
                    &self.agent,
                    self.cfg,
                    batch,
                    &self.sched,
                    epoch,
                    e,
                )?);
            }
            return Ok(out);
        }
        let workers = self.cfg.workers.min(n);
        let (cfg, agent, sched) = (self.cfg, &self.agent, &self.sched);
        let results: Vec<Result<Vec<(usize, Episode)>, CliError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        scope.spawn(move || {
                            let mut env = by_name(&cfg.env).map_err(CliError::from)?;
                            let mut mine = Vec::new();
                            let mut e = w;
                            while e < n {
                                let ep = collect_episode(
                                    env.as_mut(),
                                    agent,
                                    cfg,
                                    batch,
                                    sched,
                                    epoch,
                                    e,
                                )?;
                                mine.push((e, ep));
                                e += workers;
                            }
                            Ok(mine)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("episode collection worker panicked"))
                    .collect()
            });
        let mut indexed = Vec::with_capacity(n);
        for r in results {
            indexed.extend(r?);
        }
        indexed.sort_by_key(|(e, _)| *e);
        Ok(indexed.into_iter().map(|(_, ep)| ep).collect())
    }

    fn update_phase(
        &mut self,
        epoch: usize,
        batch: Option<&CurriculumBatch>,
    ) -> Result<(f64, f64), CliError> {
        let mut rng = seeding::rng(self.cfg.seed, Stream::Update, epoch as u64, 0);
        let reward_spec = self.env.reward_spec();
        let env = &self.env;
        let goal_map = move |s: &State| env.goal_map(s);
        let mut critic_sum = 0.0;
        let mut actor_sum = 0.0;
        for _ in 0..self.cfg.updates_per_epoch {
            // The augmented slice is additive: the relabeled batch keeps
            // its full size and curriculum-goal transitions ride on top.
            let aug_count = match (self.cfg.trans_aug, batch) {
                (true, Some(_)) => self.cfg.aug_batch,
                _ => 0,
            };
            let her_count = self.cfg.batch_size;
            let her = sample_her_batch(
                &self.trans,
                &self.cfg.relabel,
                &reward_spec,
                &goal_map,
                her_count,
                &mut rng,
            )?;
            let aug = match (aug_count, batch) {
                (0, _) | (_, None) => Vec::new(),
                (count, Some(b)) => augment_transitions(
                    &self.trans,
                    b,
                    &reward_spec,
                    &goal_map,
                    count,
                    &mut rng,
                )?,
            };
            self.stats.her_transitions += her.len() as u64;
            self.stats.aug_transitions += aug.len() as u64;
            let composed = compose_update_batch(her, aug, &mut rng)?;
            let report = self.agent.update(&composed)?;
            critic_sum += report.critic_loss;
            actor_sum += report.actor_loss;
        }
        let n = self.cfg.updates_per_epoch as f64;
        Ok((critic_sum / n, actor_sum / n))
    }
}

/// Run one training episode with exploration; applies curriculum goal
/// replacement when a batch is available. Fully determined by
/// (cfg.seed, epoch, episode).
fn collect_episode(
    env: &mut dyn GoalEnv,
    agent: &DdpgAgent,
    cfg: &RunConfig,
    batch: Option<&CurriculumBatch>,
    sched: &ExploreSchedule,
    epoch: usize,
    episode: usize,
) -> Result<Episode, CliError> {
    let master = seeding::mix(cfg.seed, Stream::Episode, epoch as u64, episode as u64);
    let reset_seed = seeding::mix(master, Stream::Episode, 0, 0);
    let goal_override = match (cfg.curriculum, batch) {
        (true, Some(b)) => {
            // Peek at the episode's goal; the rollout below repeats the
            // same seeded reset, so the peek costs one extra reset and
            // changes nothing.
            let (_, env_goal) = env.reset(reset_seed);
            let mut curriculum_rng = seeding::rng(master, Stream::Curriculum, 0, 0);
            Some(maybe_replace_goal(env_goal, b, sched, &mut curriculum_rng))
        }
        _ => None,
    };
    let mut noise_rng = seeding::rng(master, Stream::Init, 0, 0);
    let mut policy =
        |s: &State, g: &Goal| agent.select_action(s, g, true, &mut noise_rng);
    rollout(env, reset_seed, goal_override, &mut policy).map_err(CliError::from)
}

/// Success rate of a deterministic policy over seeded evaluation episodes
/// against the environment's own goals.
pub fn evaluate(
    agent: &DdpgAgent,
    env: &mut dyn GoalEnv,
    episodes: usize,
    seed: u64,
    epoch: u64,
) -> Result<f64, CliError> {
    let mut policy = |s: &State, g: &Goal| agent.action(s, g);
    evaluate_policy(&mut policy, env, episodes, seed, epoch)
}

/// [`evaluate`] generalized over any policy; lets tests score scripted
/// controllers with the same machinery.
pub fn evaluate_policy(
    policy: &mut dyn FnMut(&State, &Goal) -> Action,
    env: &mut dyn GoalEnv,
    episodes: usize,
    seed: u64,
    epoch: u64,
) -> Result<f64, CliError> {
    if episodes == 0 {
        return Err(CliError::config("evaluation needs at least one episode"));
    }
    let mut wins = 0usize;
    for e in 0..episodes {
        let reset_seed = seeding::mix(seed, Stream::Eval, epoch, e as u64);
        let ep = rollout(env, reset_seed, None, policy)?;
        if episode_succeeded(&ep) {
            wins += 1;
        }
    }
    Ok(wins as f64 / episodes as f64)
}

fn make_dump(
    epoch: usize,
    batch: &CurriculumBatch,
    ag_model: &DensityModel,
) -> Result<GoalDump, CliError> {
    let union: Vec<Goal> = batch.union().cloned().collect();
    let weights = density_priorities(&union, ag_model)?;
    let rows = union
        .iter()
        .enumerate()
        .map(|(i, g)| GoalDumpRow {
            goal: g.0.clone(),
            density: weights.raw[i],
            prob: weights.probs[i],
            entropy: batch.entropies[i],
            in_pool: batch.pool.contains(g),
        })
        .collect();
    Ok(GoalDump { epoch, rows })
}

/// Write the standard artifact set for a finished run into `dir`:
/// `progress.csv`, `curve.svg`, `final.agent`, `config.txt`, and the
/// per-epoch goal dumps when the curriculum produced any.
pub fn write_run_artifacts(
    cfg: &RunConfig,
    result: &RunResult,
    dir: &Path,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(e, dir))?;
    logging::write_progress(&dir.join("progress.csv"), &result.reports)?;
    logging::write_goal_dumps(dir, &result.goal_dumps)?;
    let series = vec![plot::Series {
        label: cfg.env.clone(),
        points: result.reports.iter().map(|r| (r.epoch as f64, r.success_rate)).collect(),
    }];
    plot::write_chart(
        &dir.join("curve.svg"),
        &format!("{}: evaluation success", cfg.env),
        "epoch",
        "success rate",
        Some((0.0, 1.0)),
        &series,
    )?;
    checkpoint::save(&dir.join("final.agent"), &result.agent)?;
    let cfg_path = dir.join("config.txt");
    std::fs::write(&cfg_path, cfg.to_file_text()).map_err(|e| CliError::io(e, &cfg_path))?;
    Ok(())
}
