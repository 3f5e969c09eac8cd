//! A self-contained DDPG agent over goal-conditioned inputs.
//!
//! The actor maps `[state, goal]` to a bounded action; the critic scores
//! `[state, action, goal]`. Both are plain MLPs trained with Adam from
//! hand-written gradients, with slow-moving target copies providing the
//! bootstrap values. Since episode rewards are in `{-1, 0}` and the
//! discount is below one, every true return lies in `[-1/(1-gamma), 0]`;
//! the TD target is clamped to that interval, which keeps early critic
//! estimates from running away.

mod normalizer;
mod snapshot;

pub mod mlp;

pub use normalizer::Normalizer;

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::types::{Action, EnvDims, Goal, State, Trajectory, Transition};
use crate::{Error, Result};

use mlp::{Adam, Gradients, Head, Mlp};

/// Hyperparameters. The defaults are tuned for the small analytic
/// environments in this crate, not for high-dimensional control.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    /// Hidden layer widths shared by actor and critic.
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Discount; also sets the TD-target clamp `[-1/(1-gamma), 0]`.
    pub gamma: f64,
    /// Target blend rate: `target = polyak * target + (1-polyak) * live`.
    pub polyak: f64,
    /// Std-dev of Gaussian exploration noise added to actor actions.
    pub action_noise: f64,
    /// Chance of replacing the action with a uniform random one while
    /// exploring.
    pub random_action_prob: f64,
    /// Weight of the action-magnitude penalty in the actor loss.
    pub action_l2: f64,
    /// Standard-deviation floor for the input normalizers.
    pub normalizer_floor: f64,
    /// Clamp for normalized inputs.
    pub normalizer_clip: f64,
}

impl Default for AgentConfig {
    fn default() -> AgentConfig {
        AgentConfig {
            hidden: alloc::vec![64, 64],
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            gamma: 0.98,
            polyak: 0.98,
            action_noise: 0.2,
            random_action_prob: 0.3,
            action_l2: 1.0,
            normalizer_floor: 0.01,
            normalizer_clip: 5.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidConfig("hidden layers must be non-empty".into()));
        }
        if !math::positive(self.actor_lr) || !math::positive(self.critic_lr) {
            return Err(Error::InvalidConfig("learning rates must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidConfig(alloc::format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.polyak) {
            return Err(Error::InvalidConfig("polyak must be in [0, 1]".into()));
        }
        if self.action_noise < 0.0 || !(0.0..=1.0).contains(&self.random_action_prob) {
            return Err(Error::InvalidConfig("bad exploration parameters".into()));
        }
        if self.action_l2 < 0.0 {
            return Err(Error::InvalidConfig("action_l2 must be non-negative".into()));
        }
        if !math::positive(self.normalizer_floor) || !math::positive(self.normalizer_clip) {
            return Err(Error::InvalidConfig("normalizer parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics from one gradient update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateReport {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub mean_target_q: f64,
}

/// Actor/critic pair with target copies and input normalization.
#[derive(Clone, Debug)]
pub struct DdpgAgent {
    dims: EnvDims,
    cfg: AgentConfig,
    actor: Mlp,
    critic: Mlp,
    target_actor: Mlp,
    target_critic: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    obs_norm: Normalizer,
    goal_norm: Normalizer,
}

impl DdpgAgent {
    pub fn new(dims: EnvDims, cfg: AgentConfig, rng: &mut ChaCha8Rng) -> Result<DdpgAgent> {
        cfg.validate()?;
        let (actor_sizes, critic_sizes) = DdpgAgent::network_sizes(&dims, &cfg);
        let actor = Mlp::new(actor_sizes, Head::Tanh, rng);
        let critic = Mlp::new(critic_sizes, Head::Identity, rng);
        Ok(DdpgAgent::assemble(dims, cfg, actor, critic))
    }

    /// All parameters zero: actions are exactly zero, values exactly zero.
    /// Handy as the canonical "untrained" baseline in tests.
    pub fn zeroed(dims: EnvDims, cfg: AgentConfig) -> Result<DdpgAgent> {
        cfg.validate()?;
        let (actor_sizes, critic_sizes) = DdpgAgent::network_sizes(&dims, &cfg);
        let actor = Mlp::zeroed(actor_sizes, Head::Tanh);
        let critic = Mlp::zeroed(critic_sizes, Head::Identity);
        Ok(DdpgAgent::assemble(dims, cfg, actor, critic))
    }

    fn network_sizes(dims: &EnvDims, cfg: &AgentConfig) -> (Vec<usize>, Vec<usize>) {
        let mut actor = alloc::vec![dims.state + dims.goal];
        actor.extend(&cfg.hidden);
        actor.push(dims.action);
        let mut critic = alloc::vec![dims.state + dims.action + dims.goal];
        critic.extend(&cfg.hidden);
        critic.push(1);
        (actor, critic)
    }

    fn assemble(dims: EnvDims, cfg: AgentConfig, actor: Mlp, critic: Mlp) -> DdpgAgent {
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        let actor_opt = Adam::new(cfg.actor_lr, actor.params().len());
        let critic_opt = Adam::new(cfg.critic_lr, critic.params().len());
        let obs_norm = Normalizer::new(dims.state, cfg.normalizer_floor, cfg.normalizer_clip);
        let goal_norm = Normalizer::new(dims.goal, cfg.normalizer_floor, cfg.normalizer_clip);
        DdpgAgent {
            dims,
            cfg,
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            obs_norm,
            goal_norm,
        }
    }

    pub fn dims(&self) -> EnvDims {
        self.dims
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    fn actor_input(&self, state: &State, goal: &Goal) -> Vec<f64> {
        let mut x = self.obs_norm.normalize(&state.0);
        x.extend(self.goal_norm.normalize(&goal.0));
        x
    }

    fn critic_input(&self, state: &State, action: &[f64], goal: &Goal) -> Vec<f64> {
        let mut x = self.obs_norm.normalize(&state.0);
        x.extend_from_slice(action);
        x.extend(self.goal_norm.normalize(&goal.0));
        x
    }

    /// Deterministic policy output.
    pub fn action(&self, state: &State, goal: &Goal) -> Action {
        Action(self.actor.forward(&self.actor_input(state, goal)))
    }

    /// Critic value of a state/action/goal triple (diagnostics).
    pub fn value(&self, state: &State, action: &Action, goal: &Goal) -> f64 {
        self.critic.forward(&self.critic_input(state, &action.0, goal))[0]
    }

    /// Behavioral policy: the deterministic action, perturbed for
    /// exploration. With `explore` the agent takes a uniform random action
    /// with probability `random_action_prob`, otherwise adds Gaussian noise
    /// per component; either way the result is clamped to `[-1, 1]`.
    pub fn select_action(
        &self,
        state: &State,
        goal: &Goal,
        explore: bool,
        rng: &mut ChaCha8Rng,
    ) -> Action {
        if !explore {
            return self.action(state, goal);
        }
        if rng.gen::<f64>() < self.cfg.random_action_prob {
            return Action((0..self.dims.action).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        let mut a = self.action(state, goal);
        for v in &mut a.0 {
            *v = (*v + self.cfg.action_noise * math::standard_normal(rng)).clamp(-1.0, 1.0);
        }
        a
    }

    /// Fold an episode into the input normalizers (states, visited goals,
    /// and the episode goal). Call between collection and updates.
    pub fn observe_episode(&mut self, traj: &Trajectory) {
        for t in &traj.transitions {
            self.obs_norm.update(&t.state.0);
        }
        if let Some(last) = traj.transitions.last() {
            self.obs_norm.update(&last.next_state.0);
        }
        for g in &traj.achieved_goals {
            self.goal_norm.update(&g.0);
        }
        self.goal_norm.update(&traj.desired_goal.0);
    }

    fn check_transition(&self, t: &Transition) -> Result<()> {
        for (len, expected) in [
            (t.state.0.len(), self.dims.state),
            (t.next_state.0.len(), self.dims.state),
            (t.action.0.len(), self.dims.action),
            (t.goal.len(), self.dims.goal),
        ] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, got: len });
            }
        }
        Ok(())
    }

    /// One gradient update on a batch: critic regression to the clamped TD
    /// target, then actor ascent on the (updated) critic with an
    /// action-magnitude penalty, then target blending.
    pub fn update(&mut self, batch: &[Transition]) -> Result<UpdateReport> {
        if batch.is_empty() {
            return Err(Error::Empty("update batch"));
        }
        for t in batch {
            self.check_transition(t)?;
        }
        let b = batch.len() as f64;
        let q_low = -1.0 / (1.0 - self.cfg.gamma);

        // TD targets from the target networks.
        let mut targets = Vec::with_capacity(batch.len());
        let mut target_q_sum = 0.0;
        for t in batch {
            let next_in = self.actor_input(&t.next_state, &t.goal);
            let a_next = self.target_actor.forward(&next_in);
            let q_next =
                self.target_critic.forward(&self.critic_input(&t.next_state, &a_next, &t.goal))[0];
            let y = (t.reward + self.cfg.gamma * q_next).clamp(q_low, 0.0);
            target_q_sum += y;
            targets.push(y);
        }

        // Critic regression.
        let mut critic_grads = Gradients::zeros_like(&self.critic);
        let mut critic_loss = 0.0;
        for (t, y) in batch.iter().zip(&targets) {
            let cache = self.critic.forward_cached(&self.critic_input(&t.state, &t.action.0, &t.goal));
            let err = cache.output()[0] - y;
            critic_loss += err * err;
            self.critic.backward(&cache, &[2.0 * err / b], Some(&mut critic_grads));
        }
        critic_loss /= b;
        self.critic_opt.step(&mut self.critic, &critic_grads);

        // Actor ascent through the critic, with the critic's own
        // parameters left untouched.
        let d_a = self.dims.action;
        let mut actor_grads = Gradients::zeros_like(&self.actor);
        let mut actor_loss = 0.0;
        for t in batch {
            let a_cache = self.actor.forward_cached(&self.actor_input(&t.state, &t.goal));
            let a_pi = a_cache.output().to_vec();
            let q_cache =
                self.critic.forward_cached(&self.critic_input(&t.state, &a_pi, &t.goal));
            let q = q_cache.output()[0];
            let sq_mean: f64 = a_pi.iter().map(|v| v * v).sum::<f64>() / d_a as f64;
            actor_loss += -q + self.cfg.action_l2 * sq_mean;
            let d_critic_in = self.critic.backward(&q_cache, &[-1.0 / b], None);
            let mut d_action = d_critic_in[self.dims.state..self.dims.state + d_a].to_vec();
            for (da, a) in d_action.iter_mut().zip(&a_pi) {
                *da += 2.0 * self.cfg.action_l2 * a / (d_a as f64 * b);
            }
            self.actor.backward(&a_cache, &d_action, Some(&mut actor_grads));
        }
        actor_loss /= b;
        self.actor_opt.step(&mut self.actor, &actor_grads);

        // Slow target tracking.
        self.target_actor.blend_from(&self.actor, self.cfg.polyak);
        self.target_critic.blend_from(&self.critic, self.cfg.polyak);

        let report = UpdateReport {
            critic_loss,
            actor_loss,
            mean_target_q: target_q_sum / b,
        };
        if !report.critic_loss.is_finite()
            || !report.actor_loss.is_finite()
            || !report.mean_target_q.is_finite()
        {
            return Err(Error::NonFinite("update report"));
        }
        Ok(report)
    }

    /// Serialize parameters and normalizer statistics (not optimizer
    /// moments) to a versioned little-endian byte image.
    pub fn to_bytes(&self) -> Vec<u8> {
        snapshot::encode(self)
    }

    /// Inverse of [`Self::to_bytes`]; the result reproduces actions
    /// bit-for-bit.
    pub fn from_bytes(bytes: &[u8]) -> Result<DdpgAgent> {
        snapshot::decode(bytes)
    }

    // Snapshot internals.
    pub(crate) fn parts(
        &self,
    ) -> (&EnvDims, &AgentConfig, [&Mlp; 4], [&Normalizer; 2]) {
        (
            &self.dims,
            &self.cfg,
            [&self.actor, &self.critic, &self.target_actor, &self.target_critic],
            [&self.obs_norm, &self.goal_norm],
        )
    }

    pub(crate) fn from_parts(
        dims: EnvDims,
        cfg: AgentConfig,
        nets: [Mlp; 4],
        norms: [Normalizer; 2],
    ) -> DdpgAgent {
        let [actor, critic, target_actor, target_critic] = nets;
        let [obs_norm, goal_norm] = norms;
        let actor_opt = Adam::new(cfg.actor_lr, actor.params().len());
        let critic_opt = Adam::new(cfg.critic_lr, critic.params().len());
        DdpgAgent {
            dims,
            cfg,
            actor,
            critic,
            target_actor,
            target_critic,
            actor_opt,
            critic_opt,
            obs_norm,
            goal_norm,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{self, Stream};
    use alloc::vec;

    fn dims() -> EnvDims {
        EnvDims { state: 4, action: 2, goal: 2 }
    }

    fn rng(n: u64) -> ChaCha8Rng {
        seeding::rng(n, Stream::Init, 0, 0)
    }

    fn fresh(seed: u64) -> DdpgAgent {
        DdpgAgent::new(dims(), AgentConfig::default(), &mut rng(seed)).unwrap()
    }

    fn toy_transition(reward: f64, r: &mut ChaCha8Rng) -> Transition {
        Transition {
            state: State((0..4).map(|_| r.gen::<f64>()).collect()),
            action: Action((0..2).map(|_| r.gen_range(-1.0..1.0)).collect()),
            goal: Goal((0..2).map(|_| r.gen::<f64>()).collect()),
            reward,
            next_state: State((0..4).map(|_| r.gen::<f64>()).collect()),
        }
    }

    #[test]
    fn zeroed_agent_emits_the_zero_action() {
        let agent = DdpgAgent::zeroed(dims(), AgentConfig::default()).unwrap();
        let a = agent.action(&State(vec![0.3, 0.1, 0.7, 0.2]), &Goal(vec![0.9, 0.9]));
        assert_eq!(a, Action(vec![0.0, 0.0]));
    }

    #[test]
    fn deterministic_actions_repeat_and_stay_bounded() {
        let agent = fresh(1);
        let s = State(vec![0.2, 0.8, 0.5, 0.1]);
        let g = Goal(vec![0.4, 0.6]);
        let a1 = agent.action(&s, &g);
        let a2 = agent.action(&s, &g);
        assert_eq!(a1, a2);
        assert!(a1.in_bounds());
    }

    #[test]
    fn random_action_fraction_matches_the_config() {
        // With zero noise and a zeroed actor, any nonzero action must have
        // come from the uniform branch.
        let cfg = AgentConfig { action_noise: 0.0, ..Default::default() };
        let agent = DdpgAgent::zeroed(dims(), cfg).unwrap();
        let s = State(vec![0.0; 4]);
        let g = Goal(vec![0.0; 2]);
        let mut r = rng(2);
        let n = 100_000;
        let mut randoms = 0;
        for _ in 0..n {
            if agent.select_action(&s, &g, true, &mut r).0.iter().any(|v| *v != 0.0) {
                randoms += 1;
            }
        }
        let frac = randoms as f64 / n as f64;
        assert!((frac - 0.3).abs() < 0.01, "random action rate {frac}");
    }

    #[test]
    fn exploration_noise_has_the_configured_scale() {
        let cfg = AgentConfig { random_action_prob: 0.0, ..Default::default() };
        let agent = DdpgAgent::zeroed(dims(), cfg).unwrap();
        let s = State(vec![0.0; 4]);
        let g = Goal(vec![0.0; 2]);
        let mut r = rng(3);
        let n = 50_000;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let a = agent.select_action(&s, &g, true, &mut r);
            sumsq += a.0[0] * a.0[0];
        }
        let std = (sumsq / n as f64).sqrt();
        assert!((std - 0.2).abs() < 0.01, "noise scale {std}");
    }

    #[test]
    fn eval_mode_ignores_exploration() {
        let agent = fresh(4);
        let s = State(vec![0.2, 0.8, 0.5, 0.1]);
        let g = Goal(vec![0.4, 0.6]);
        let mut r = rng(5);
        let base = agent.action(&s, &g);
        for _ in 0..10 {
            assert_eq!(agent.select_action(&s, &g, false, &mut r), base);
        }
    }

    #[test]
    fn critic_loss_decreases_on_a_frozen_target() {
        // polyak = 1 freezes the targets, so the regression target is
        // fixed and the critic must fit it.
        let cfg = AgentConfig { polyak: 1.0, ..Default::default() };
        let mut agent = DdpgAgent::new(dims(), cfg, &mut rng(6)).unwrap();
        let mut r = rng(7);
        let batch: Vec<Transition> = (0..8).map(|_| toy_transition(-1.0, &mut r)).collect();
        let first = agent.update(&batch).unwrap().critic_loss;
        let mut last = first;
        for _ in 0..99 {
            last = agent.update(&batch).unwrap().critic_loss;
        }
        assert!(last < first, "critic failed to fit: {first} -> {last}");
    }

    #[test]
    fn td_targets_respect_the_return_clamp() {
        let mut agent = fresh(8);
        let mut r = rng(9);
        // Mix of success and failure rewards.
        let batch: Vec<Transition> = (0..32)
            .map(|i| toy_transition(if i % 4 == 0 { 0.0 } else { -1.0 }, &mut r))
            .collect();
        for _ in 0..5 {
            let rep = agent.update(&batch).unwrap();
            let low = -1.0 / (1.0 - agent.config().gamma);
            assert!(rep.mean_target_q <= 0.0 && rep.mean_target_q >= low);
        }
    }

    #[test]
    fn update_rejects_empty_and_misshapen_batches() {
        let mut agent = fresh(10);
        assert_eq!(agent.update(&[]).unwrap_err(), Error::Empty("update batch"));
        let mut r = rng(11);
        let mut t = toy_transition(-1.0, &mut r);
        t.goal = Goal(vec![0.5]);
        assert!(matches!(
            agent.update(&[t]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn updates_are_deterministic_given_identical_inputs() {
        let mut a = fresh(12);
        let mut b = fresh(12);
        let mut r = rng(13);
        let batch: Vec<Transition> = (0..16).map(|_| toy_transition(-1.0, &mut r)).collect();
        for _ in 0..3 {
            let ra = a.update(&batch).unwrap();
            let rb = b.update(&batch).unwrap();
            assert_eq!(ra, rb);
        }
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn observing_episodes_feeds_the_normalizers() {
        let mut agent = fresh(14);
        let goal = Goal(vec![0.5, 0.5]);
        let traj = Trajectory {
            transitions: vec![Transition {
                state: State(vec![1.0, 2.0, 3.0, 4.0]),
                action: Action(vec![0.0, 0.0]),
                goal: goal.clone(),
                reward: -1.0,
                next_state: State(vec![2.0, 3.0, 4.0, 5.0]),
            }],
            desired_goal: goal,
            achieved_goals: vec![Goal(vec![1.0, 2.0])],
        };
        agent.observe_episode(&traj);
        // One state + one final next state; one achieved + one desired goal.
        assert_eq!(agent.obs_norm.count(), 2.0);
        assert_eq!(agent.goal_norm.count(), 2.0);
    }
}
