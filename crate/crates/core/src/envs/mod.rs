//! Analytic goal-conditioned environments.
//!
//! All three tasks share the same contract: fully deterministic dynamics,
//! randomness only through the reset seed, two-dimensional goal spaces, and
//! a sparse reward through [`crate::types::sparse_reward`]. They are cheap
//! enough to roll out millions of steps in tests.
//!
//! * [`PointReach`] — move a point to a goal inside the unit box. The
//!   smoke-test task: plain hindsight training solves it quickly.
//! * [`PushGap`] — drag a box through a narrow gap in a wall. Desired goals
//!   all sit on the far side, so undirected exploration rarely sees them.
//! * [`Throw`] — commit to a release velocity during a short hold phase,
//!   then watch damped ballistics carry the ball to goals outside the
//!   agent's reachable strip.

mod point_reach;
mod push_gap;
mod throw;

pub use point_reach::PointReach;
pub use push_gap::PushGap;
pub use throw::Throw;

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::RngCore;

use crate::types::{sparse_reward, Action, EnvDims, Goal, RewardSpec, State, Trajectory, Transition};
use crate::{Error, Result};

/// Contract every environment implements.
///
/// `reset` fully determines an episode together with the action sequence;
/// `step` has no randomness of its own. Calling `step` before `reset`, or
/// with a mis-sized action, is a programming error and panics. Out-of-range
/// action *values* are tolerated: they are clamped to `[-1, 1]` and counted
/// in [`GoalEnv::clip_events`].
pub trait GoalEnv {
    fn name(&self) -> &'static str;
    fn dims(&self) -> EnvDims;
    /// Fixed episode length.
    fn horizon(&self) -> usize;
    fn reward_spec(&self) -> RewardSpec;
    /// Start a fresh episode; equal seeds reproduce identical episodes.
    /// Returns the initial state and the episode's desired goal.
    fn reset(&mut self, seed: u64) -> (State, Goal);
    /// Advance the simulation by one action.
    fn step(&mut self, action: &Action) -> State;
    /// Project a state to the goal it achieves.
    fn goal_map(&self, state: &State) -> Goal;
    /// Draw from the task's desired-goal distribution.
    fn sample_desired_goal(&self, rng: &mut dyn RngCore) -> Goal;
    /// How many action components have been clamped so far.
    fn clip_events(&self) -> u64;
}

/// Environment registry for CLI/config selection.
pub fn by_name(name: &str) -> Result<Box<dyn GoalEnv>> {
    match name {
        "point_reach" => Ok(Box::new(PointReach::new())),
        "push_gap" => Ok(Box::new(PushGap::new())),
        "throw" => Ok(Box::new(Throw::new())),
        other => Err(Error::InvalidConfig(alloc::format!(
            "unknown environment '{other}' (expected point_reach, push_gap or throw)"
        ))),
    }
}

/// Names accepted by [`by_name`].
pub const ENV_NAMES: [&str; 3] = ["point_reach", "push_gap", "throw"];

/// An episode plus the goal the environment originally proposed (which can
/// differ from the trajectory's goal when the curriculum replaced it).
#[derive(Clone, Debug)]
pub struct Episode {
    pub trajectory: Trajectory,
    pub env_goal: Goal,
}

/// Roll one full episode. The policy sees the behavioral goal
/// (`goal_override` if given, the environment's own goal otherwise); every
/// transition's reward is the sparse reward of the next state's achieved
/// goal against that behavioral goal.
pub fn rollout(
    env: &mut dyn GoalEnv,
    reset_seed: u64,
    goal_override: Option<Goal>,
    policy: &mut dyn FnMut(&State, &Goal) -> Action,
) -> Result<Episode> {
    let (mut state, env_goal) = env.reset(reset_seed);
    let goal = goal_override.unwrap_or_else(|| env_goal.clone());
    let spec = env.reward_spec();
    let horizon = env.horizon();
    let mut transitions = Vec::with_capacity(horizon);
    let mut achieved_goals = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let action = policy(&state, &goal);
        let next = env.step(&action);
        let reward = sparse_reward(&env.goal_map(&next), &goal, &spec)?;
        achieved_goals.push(env.goal_map(&state));
        transitions.push(Transition {
            state,
            action,
            goal: goal.clone(),
            reward,
            next_state: next.clone(),
        });
        state = next;
    }
    let trajectory = Trajectory { transitions, desired_goal: goal, achieved_goals };
    Ok(Episode { trajectory, env_goal })
}

/// Success criterion shared by evaluation and tests: the episode ends with
/// the achieved goal inside the reward tolerance.
pub fn episode_succeeded(episode: &Episode) -> bool {
    episode.trajectory.transitions.last().map(|t| t.reward == 0.0).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{self, Stream};
    use alloc::vec;

    #[test]
    fn registry_knows_all_environments() {
        for name in ENV_NAMES {
            let env = by_name(name).unwrap();
            assert_eq!(env.name(), name);
        }
        assert!(by_name("cartpole").is_err());
    }

    #[test]
    fn rollout_shapes_are_consistent_everywhere() {
        for name in ENV_NAMES {
            let mut env = by_name(name).unwrap();
            let dims = env.dims();
            let mut policy = |_: &State, _: &Goal| Action(vec![0.3; dims.action]);
            let ep = rollout(env.as_mut(), 7, None, &mut policy).unwrap();
            let traj = &ep.trajectory;
            assert_eq!(traj.len(), env.horizon());
            traj.validate().unwrap();
            for t in &traj.transitions {
                assert_eq!(t.state.0.len(), dims.state);
                assert_eq!(t.next_state.0.len(), dims.state);
                assert_eq!(t.goal.len(), dims.goal);
            }
            assert_eq!(ep.env_goal, traj.desired_goal);
        }
    }

    #[test]
    fn rollout_with_override_keeps_the_env_goal_separate() {
        let mut env = by_name("point_reach").unwrap();
        let over = Goal(vec![0.25, 0.75]);
        let mut policy = |_: &State, _: &Goal| Action(vec![0.0, 0.0]);
        let ep = rollout(env.as_mut(), 3, Some(over.clone()), &mut policy).unwrap();
        assert_eq!(ep.trajectory.desired_goal, over);
        assert_ne!(ep.env_goal, over, "seeded env goal should differ from the override");
        // Rewards were computed against the override.
        let spec = env.reward_spec();
        for t in &ep.trajectory.transitions {
            let expect =
                sparse_reward(&env.goal_map(&t.next_state), &over, &spec).unwrap();
            assert_eq!(t.reward, expect);
        }
    }

    #[test]
    fn achieved_goals_track_the_pre_step_states() {
        let mut env = by_name("point_reach").unwrap();
        let mut policy = |_: &State, _: &Goal| Action(vec![1.0, 0.5]);
        let ep = rollout(env.as_mut(), 11, None, &mut policy).unwrap();
        let traj = &ep.trajectory;
        for (t, ag) in traj.transitions.iter().zip(&traj.achieved_goals) {
            assert_eq!(*ag, env.goal_map(&t.state));
        }
    }

    #[test]
    fn identical_seeds_reproduce_identical_episodes() {
        for name in ENV_NAMES {
            let mut env = by_name(name).unwrap();
            let dims = env.dims();
            // A scripted, state-independent action tape.
            let tape: Vec<Action> = {
                let mut r = seeding::rng(5, Stream::Episode, 0, 0);
                use rand::Rng;
                (0..env.horizon())
                    .map(|_| Action((0..dims.action).map(|_| r.gen_range(-1.0..1.0)).collect()))
                    .collect()
            };
            let run = |env: &mut Box<dyn GoalEnv>| {
                let mut i = 0;
                let mut policy = |_: &State, _: &Goal| {
                    let a = tape[i].clone();
                    i += 1;
                    a
                };
                rollout(env.as_mut(), 42, None, &mut policy).unwrap()
            };
            let a = run(&mut env);
            let b = run(&mut env);
            assert_eq!(a.trajectory, b.trajectory, "{name} is not deterministic");
            // Different seed, different start.
            let (s_a, _) = env.reset(42);
            let (s_b, _) = env.reset(43);
            assert_ne!(s_a, s_b, "{name} ignores its seed");
        }
    }

    #[test]
    fn desired_goal_samples_stay_in_their_support() {
        let mut rng = seeding::rng(8, Stream::Episode, 1, 1);
        for name in ENV_NAMES {
            let env = by_name(name).unwrap();
            for _ in 0..10_000 {
                let g = env.sample_desired_goal(&mut rng);
                assert_eq!(g.len(), env.dims().goal);
                assert!(g.0.iter().all(|v| v.is_finite()));
                match name {
                    "point_reach" => {
                        assert!(g.0.iter().all(|v| (0.0..=1.0).contains(v)));
                    }
                    "push_gap" => {
                        assert!((0.6..=0.95).contains(&g.0[0]), "x out of band: {}", g.0[0]);
                        assert!((0.05..=0.95).contains(&g.0[1]));
                    }
                    "throw" => {
                        assert!((1.2..=1.8).contains(&g.0[0]), "x out of band: {}", g.0[0]);
                        assert!((0.2..=0.8).contains(&g.0[1]));
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn out_of_range_actions_are_clamped_and_counted() {
        let mut env = by_name("point_reach").unwrap();
        let (s0, _) = env.reset(1);
        assert_eq!(env.clip_events(), 0);
        let wild = env.step(&Action(vec![5.0, 0.0]));
        assert_eq!(env.clip_events(), 1);
        // Effect identical to the clamped action.
        let (s1, _) = env.reset(1);
        assert_eq!(s0, s1);
        let tame = env.step(&Action(vec![1.0, 0.0]));
        assert_eq!(wild, tame);
    }
}
