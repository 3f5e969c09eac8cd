use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GoalEnv;
use crate::types::{Action, EnvDims, Goal, RewardSpec, State};

/// Velocity-controlled point in the unit square.
///
/// The state is the position, the achieved goal is the state itself, and a
/// step moves the point by `STEP * action`, clamped back into the square.
/// Start positions and goals are both uniform over the square.
pub struct PointReach {
    pos: [f64; 2],
    ready: bool,
    clips: u64,
}

const STEP: f64 = 0.05;
const DELTA: f64 = 0.05;
const HORIZON: usize = 50;

impl PointReach {
    pub fn new() -> Self {
        PointReach { pos: [0.0; 2], ready: false, clips: 0 }
    }
}

impl Default for PointReach {
    fn default() -> Self {
        Self::new()
    }
}

impl GoalEnv for PointReach {
    fn name(&self) -> &'static str {
        "point_reach"
    }

    fn dims(&self) -> EnvDims {
        EnvDims { state: 2, action: 2, goal: 2 }
    }

    fn horizon(&self) -> usize {
        HORIZON
    }

    fn reward_spec(&self) -> RewardSpec {
        RewardSpec::new(DELTA)
    }

    fn reset(&mut self, seed: u64) -> (State, Goal) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.pos = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        self.ready = true;
        self.clips = 0;
        let goal = self.sample_desired_goal(&mut rng);
        (State(self.pos.to_vec()), goal)
    }

    fn step(&mut self, action: &Action) -> State {
        assert!(self.ready, "PointReach::step called before reset");
        assert_eq!(action.0.len(), 2, "PointReach expects 2-dimensional actions");
        let a = clamp_action(action, &mut self.clips);
        for (p, a) in self.pos.iter_mut().zip(&a) {
            *p = (*p + STEP * a).clamp(0.0, 1.0);
        }
        State(self.pos.to_vec())
    }

    fn goal_map(&self, state: &State) -> Goal {
        Goal(state.0[..2].to_vec())
    }

    fn sample_desired_goal(&self, rng: &mut dyn RngCore) -> Goal {
        Goal(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
    }

    fn clip_events(&self) -> u64 {
        self.clips
    }
}

/// Clamp every component into `[-1, 1]`, counting violations.
pub(super) fn clamp_action(action: &Action, clips: &mut u64) -> Vec<f64> {
    action
        .0
        .iter()
        .map(|&v| {
            if !(-1.0..=1.0).contains(&v) {
                *clips += 1;
                v.clamp(-1.0, 1.0)
            } else {
                v
            }
        })
        .collect()
}
