//! Ball-throwing task with a committed release.
//!
//! The episode opens with a fixed hold phase: for `HOLD` steps the ball
//! rides on the agent while every action both moves the agent (inside the
//! unit square) and accrues release velocity at `THROW_SCALE / HOLD` per
//! step. At the end of the hold phase the ball is released and follows
//! damped ballistics — each flight step first decays the velocity by the
//! damping factor, then moves the ball by it — which caps the total flight
//! displacement at `v * (1-d)/d` per axis. Desired goals lie in a band
//! (`x ∈ [1.2, 1.8]`) the agent itself can never enter, so only a throw
//! can score: the interesting control happens entirely before release.

use alloc::vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::point_reach::clamp_action;
use super::GoalEnv;
use crate::types::{Action, EnvDims, Goal, RewardSpec, State};

pub struct Throw {
    agent: [f64; 2],
    ball: [f64; 2],
    vel: [f64; 2],
    steps: usize,
    ready: bool,
    clips: u64,
}

const STEP: f64 = 0.05;
const DELTA: f64 = 0.08;
const HORIZON: usize = 50;
/// Steps before the ball is released.
pub(crate) const HOLD: usize = 10;
/// Release speed at full throttle: holding `a = 1` for the whole hold
/// phase releases at velocity 0.3 per axis.
pub(crate) const THROW_SCALE: f64 = 0.3;
/// Per-step velocity decay after release.
pub(crate) const DAMPING: f64 = 0.1;

impl Throw {
    pub fn new() -> Self {
        Throw { agent: [0.0; 2], ball: [0.0; 2], vel: [0.0; 2], steps: 0, ready: false, clips: 0 }
    }

    fn state(&self) -> State {
        let released = if self.steps >= HOLD { 1.0 } else { 0.0 };
        let hold_left = (HOLD.saturating_sub(self.steps)) as f64 / HOLD as f64;
        State(vec![
            self.agent[0],
            self.agent[1],
            self.ball[0],
            self.ball[1],
            self.vel[0],
            self.vel[1],
            released,
            hold_left,
        ])
    }
}

impl Default for Throw {
    fn default() -> Self {
        Self::new()
    }
}

impl GoalEnv for Throw {
    fn name(&self) -> &'static str {
        "throw"
    }

    fn dims(&self) -> EnvDims {
        EnvDims { state: 8, action: 2, goal: 2 }
    }

    fn horizon(&self) -> usize {
        HORIZON
    }

    fn reward_spec(&self) -> RewardSpec {
        RewardSpec::new(DELTA)
    }

    fn reset(&mut self, seed: u64) -> (State, Goal) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.agent = [rng.gen_range(0.30..0.70), rng.gen_range(0.20..0.80)];
        self.ball = self.agent;
        self.vel = [0.0, 0.0];
        self.steps = 0;
        self.ready = true;
        self.clips = 0;
        let goal = self.sample_desired_goal(&mut rng);
        (self.state(), goal)
    }

    fn step(&mut self, action: &Action) -> State {
        assert!(self.ready, "Throw::step called before reset");
        assert_eq!(action.0.len(), 2, "Throw expects 2-dimensional actions");
        let a = clamp_action(action, &mut self.clips);
        for (p, a) in self.agent.iter_mut().zip(&a) {
            *p = (*p + STEP * a).clamp(0.0, 1.0);
        }
        if self.steps < HOLD {
            self.ball = self.agent;
            for (v, a) in self.vel.iter_mut().zip(&a) {
                *v += THROW_SCALE / HOLD as f64 * a;
            }
        } else {
            for (p, v) in self.ball.iter_mut().zip(self.vel.iter_mut()) {
                *v *= 1.0 - DAMPING;
                *p += *v;
            }
        }
        self.steps += 1;
        self.state()
    }

    fn goal_map(&self, state: &State) -> Goal {
        Goal(state.0[2..4].to_vec())
    }

    fn sample_desired_goal(&self, rng: &mut dyn RngCore) -> Goal {
        Goal(vec![rng.gen_range(1.20..1.80), rng.gen_range(0.20..0.80)])
    }

    fn clip_events(&self) -> u64 {
        self.clips
    }
}
