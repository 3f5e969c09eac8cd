//! Box-pushing task with a walled gap.
//!
//! A vertical wall at `x = 0.5` splits the unit square; only the gap
//! `y ∈ [0.45, 0.55]` lets anything through. The agent starts on the left
//! together with a box, while every desired goal lies on the right — the
//! box must be carried through the gap. Contact is kinematic rather than
//! physical: while the agent starts a step within the contact radius of
//! the box, the box copies the agent's realized displacement that step.
//! The wall applies to agent and box independently: a move whose straight
//! path crosses the wall outside the gap loses its x-component ("slides"
//! along the wall) and keeps the y-component.

use alloc::vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::point_reach::clamp_action;
use super::GoalEnv;
use crate::types::{Action, EnvDims, Goal, RewardSpec, State};

pub struct PushGap {
    agent: [f64; 2],
    box_pos: [f64; 2],
    ready: bool,
    clips: u64,
}

const STEP: f64 = 0.05;
const DELTA: f64 = 0.05;
const HORIZON: usize = 50;
const WALL_X: f64 = 0.5;
const GAP_LO: f64 = 0.45;
const GAP_HI: f64 = 0.55;
const CONTACT: f64 = 0.06;

impl PushGap {
    pub fn new() -> Self {
        PushGap { agent: [0.0; 2], box_pos: [0.0; 2], ready: false, clips: 0 }
    }

    fn in_contact(&self) -> bool {
        let dx = self.agent[0] - self.box_pos[0];
        let dy = self.agent[1] - self.box_pos[1];
        (dx * dx + dy * dy) <= CONTACT * CONTACT
    }

    fn state(&self) -> State {
        State(vec![self.agent[0], self.agent[1], self.box_pos[0], self.box_pos[1]])
    }
}

impl Default for PushGap {
    fn default() -> Self {
        Self::new()
    }
}

/// Apply a displacement, blocking straight paths that cross the wall
/// outside the gap. Crossing exactly through a gap endpoint counts as
/// through the gap; starting exactly on the wall line never blocks (the
/// line itself is passable in both directions).
fn move_through_wall(from: [f64; 2], disp: [f64; 2]) -> [f64; 2] {
    let mut to = [from[0] + disp[0], from[1] + disp[1]];
    let a = from[0] - WALL_X;
    let b = to[0] - WALL_X;
    if a * b < 0.0 {
        let t = a / (a - b);
        let y_cross = from[1] + t * (to[1] - from[1]);
        if !(GAP_LO..=GAP_HI).contains(&y_cross) {
            to[0] = from[0];
        }
    }
    [to[0].clamp(0.0, 1.0), to[1].clamp(0.0, 1.0)]
}

impl GoalEnv for PushGap {
    fn name(&self) -> &'static str {
        "push_gap"
    }

    fn dims(&self) -> EnvDims {
        EnvDims { state: 4, action: 2, goal: 2 }
    }

    fn horizon(&self) -> usize {
        HORIZON
    }

    fn reward_spec(&self) -> RewardSpec {
        RewardSpec::new(DELTA)
    }

    fn reset(&mut self, seed: u64) -> (State, Goal) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.box_pos = [rng.gen_range(0.20..0.38), rng.gen_range(0.30..0.70)];
        // The agent spawns near the box (still left of the wall): contact
        // is cheap to discover, pushing the box *somewhere* is learned
        // early, and the actual challenge stays finding the gap.
        self.agent = [
            (self.box_pos[0] + rng.gen_range(-0.10..0.10)).clamp(0.02, 0.39),
            (self.box_pos[1] + rng.gen_range(-0.10..0.10)).clamp(0.02, 0.98),
        ];
        self.ready = true;
        self.clips = 0;
        let goal = self.sample_desired_goal(&mut rng);
        (self.state(), goal)
    }

    fn step(&mut self, action: &Action) -> State {
        assert!(self.ready, "PushGap::step called before reset");
        assert_eq!(action.0.len(), 2, "PushGap expects 2-dimensional actions");
        let a = clamp_action(action, &mut self.clips);
        let contact = self.in_contact();
        let before = self.agent;
        self.agent = move_through_wall(self.agent, [STEP * a[0], STEP * a[1]]);
        if contact {
            let realized = [self.agent[0] - before[0], self.agent[1] - before[1]];
            self.box_pos = move_through_wall(self.box_pos, realized);
        }
        self.state()
    }

    fn goal_map(&self, state: &State) -> Goal {
        Goal(state.0[2..4].to_vec())
    }

    fn sample_desired_goal(&self, rng: &mut dyn RngCore) -> Goal {
        Goal(vec![rng.gen_range(0.60..0.95), rng.gen_range(0.05..0.95)])
    }

    fn clip_events(&self) -> u64 {
        self.clips
    }
}
