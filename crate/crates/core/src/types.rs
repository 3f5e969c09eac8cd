//! Domain types shared by every module, plus the sparse goal-based reward.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// A point in goal space (desired or achieved).
#[derive(Clone, Debug, PartialEq)]
pub struct Goal(pub Vec<f64>);

/// A full environment observation.
#[derive(Clone, Debug, PartialEq)]
pub struct State(pub Vec<f64>);

/// An action command; every component is expected in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Action(pub Vec<f64>);

impl Goal {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Action {
    /// True when every component is finite and inside `[-1, 1]`.
    pub fn in_bounds(&self) -> bool {
        self.0.iter().all(|v| v.is_finite() && (-1.0..=1.0).contains(v))
    }

    /// Copy with every component clamped to `[-1, 1]`.
    pub fn clamped(&self) -> Action {
        Action(self.0.iter().map(|v| v.clamp(-1.0, 1.0)).collect())
    }
}

/// Environment signature: widths of the state, action and goal vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvDims {
    pub state: usize,
    pub action: usize,
    pub goal: usize,
}

/// Distance metric for the reward. Only the Euclidean norm is in use, but
/// the reward contract names the metric explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
}

/// Reward definition: success is "achieved goal within `delta` of the
/// desired goal" under `metric`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardSpec {
    pub delta: f64,
    pub metric: Metric,
}

impl RewardSpec {
    pub fn new(delta: f64) -> RewardSpec {
        RewardSpec { delta, metric: Metric::Euclidean }
    }
}

/// One environment step, already paired with the goal it was collected
/// under. `reward` is always the sparse reward of `next_state`'s achieved
/// goal against `goal`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: Action,
    pub goal: Goal,
    pub reward: f64,
    pub next_state: State,
}

/// A complete episode: `transitions[t]` starts from the state whose achieved
/// goal is `achieved_goals[t]`, and every transition carries `desired_goal`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    pub desired_goal: Goal,
    pub achieved_goals: Vec<Goal>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Shape contract checked on storage: non-empty, one achieved goal per
    /// step, and a single shared desired goal across all transitions.
    pub fn validate(&self) -> Result<()> {
        if self.transitions.is_empty() {
            return Err(Error::MalformedTrajectory("no transitions"));
        }
        if self.achieved_goals.len() != self.transitions.len() {
            return Err(Error::MalformedTrajectory(
                "achieved goal count does not match transition count",
            ));
        }
        if self.transitions.iter().any(|t| t.goal != self.desired_goal) {
            return Err(Error::MalformedTrajectory(
                "transitions disagree on the desired goal",
            ));
        }
        Ok(())
    }
}

/// Euclidean distance between two goal-space points.
pub fn distance(a: &Goal, b: &Goal) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let sq: f64 = a
        .0
        .iter()
        .zip(&b.0)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(math::sqrt(sq))
}

/// Sparse goal-based reward: `0` when the achieved goal lies within
/// `spec.delta` of the desired goal (boundary counts as success), `-1`
/// otherwise.
pub fn sparse_reward(achieved: &Goal, desired: &Goal, spec: &RewardSpec) -> Result<f64> {
    let Metric::Euclidean = spec.metric;
    let d = distance(achieved, desired)?;
    Ok(if d <= spec.delta { 0.0 } else { -1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn g(v: &[f64]) -> Goal {
        Goal(v.to_vec())
    }

    #[test]
    fn distance_of_unit_corners_is_sqrt_two() {
        let d = distance(&g(&[1.0, 0.0, 0.0]), &g(&[0.0, 1.0, 0.0])).unwrap();
        assert!((d - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = g(&[0.3, -2.5]);
        assert_eq!(distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_mismatched_dims() {
        let err = distance(&g(&[0.0, 0.0]), &g(&[0.0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn reward_is_zero_within_delta() {
        let spec = RewardSpec::new(0.05);
        assert_eq!(sparse_reward(&g(&[0.0, 0.0]), &g(&[0.03, 0.0]), &spec).unwrap(), 0.0);
    }

    #[test]
    fn reward_on_the_boundary_counts_as_success() {
        let spec = RewardSpec::new(0.05);
        assert_eq!(sparse_reward(&g(&[0.0, 0.0]), &g(&[0.05, 0.0]), &spec).unwrap(), 0.0);
    }

    #[test]
    fn reward_is_minus_one_outside_delta() {
        let spec = RewardSpec::new(0.05);
        assert_eq!(sparse_reward(&g(&[0.0, 0.0]), &g(&[0.0, 0.0501]), &spec).unwrap(), -1.0);
    }

    #[test]
    fn reward_propagates_dimension_errors() {
        let spec = RewardSpec::new(0.05);
        assert!(sparse_reward(&g(&[0.0]), &g(&[0.0, 0.0]), &spec).is_err());
    }

    #[test]
    fn action_bounds_check_and_clamp() {
        assert!(Action(vec![0.0, -1.0, 1.0]).in_bounds());
        let wild = Action(vec![1.7, -3.0]);
        assert!(!wild.in_bounds());
        assert_eq!(wild.clamped(), Action(vec![1.0, -1.0]));
    }

    fn dummy_traj(goal: Goal, steps: usize) -> Trajectory {
        let transitions = (0..steps)
            .map(|i| Transition {
                state: State(vec![i as f64, 0.0]),
                action: Action(vec![0.0, 0.0]),
                goal: goal.clone(),
                reward: -1.0,
                next_state: State(vec![i as f64 + 1.0, 0.0]),
            })
            .collect();
        let achieved_goals = (0..steps).map(|i| g(&[i as f64, 0.0])).collect();
        Trajectory { transitions, desired_goal: goal, achieved_goals }
    }

    #[test]
    fn well_formed_trajectory_validates() {
        assert!(dummy_traj(g(&[9.0, 9.0]), 5).validate().is_ok());
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        let t =
            Trajectory { transitions: vec![], desired_goal: g(&[0.0]), achieved_goals: vec![] };
        assert!(matches!(t.validate(), Err(Error::MalformedTrajectory(_))));
    }

    #[test]
    fn achieved_goal_count_must_match() {
        let mut t = dummy_traj(g(&[9.0, 9.0]), 5);
        t.achieved_goals.pop();
        assert!(t.validate().is_err());
    }

    #[test]
    fn diverging_desired_goal_is_rejected() {
        let mut t = dummy_traj(g(&[9.0, 9.0]), 5);
        t.transitions[3].goal = g(&[1.0, 1.0]);
        assert!(t.validate().is_err());
    }
}
