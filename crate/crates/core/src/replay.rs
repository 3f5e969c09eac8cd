//! Trajectory storage, hindsight relabeling, and transition augmentation.
//!
//! Episodes are stored whole. Relabeling happens at *sample* time: a drawn
//! transition keeps its stored goal with probability `1/(replay_k+1)` and is
//! otherwise re-labeled with an achieved goal from a strictly later step of
//! its own trajectory, with the reward recomputed against the new goal.
//! Nothing in the buffer is ever mutated by sampling.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::curriculum::CurriculumBatch;
use crate::types::{sparse_reward, Goal, RewardSpec, State, Trajectory, Transition};
use crate::{Error, Result};

/// Default transition capacity of the replay buffer.
pub const DEFAULT_TRANSITION_CAPACITY: usize = 1_000_000;

/// Default capacity of the achieved/desired goal rings.
pub const DEFAULT_GOAL_CAPACITY: usize = 1000;

/// Relabeling strategy. Only "future" (achieved goals from later steps of
/// the same episode) is implemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Future,
}

/// How aggressively to relabel sampled transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelabelSpec {
    /// Ratio of relabeled to original goals: a sampled transition is
    /// relabeled with probability `replay_k / (replay_k + 1)`.
    pub replay_k: usize,
    pub strategy: Strategy,
}

impl Default for RelabelSpec {
    fn default() -> RelabelSpec {
        RelabelSpec { replay_k: 4, strategy: Strategy::Future }
    }
}

impl RelabelSpec {
    pub fn relabel_probability(&self) -> f64 {
        self.replay_k as f64 / (self.replay_k as f64 + 1.0)
    }
}

/// Fixed-capacity FIFO ring of goals feeding the density models.
#[derive(Clone, Debug)]
pub struct GoalBuffer {
    goals: VecDeque<Goal>,
    capacity: usize,
}

impl GoalBuffer {
    pub fn new(capacity: usize) -> Result<GoalBuffer> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("goal buffer capacity must be positive".into()));
        }
        Ok(GoalBuffer { goals: VecDeque::with_capacity(capacity), capacity })
    }

    /// Append a goal, evicting the oldest when full.
    pub fn push(&mut self, goal: Goal) {
        if self.goals.len() == self.capacity {
            self.goals.pop_front();
        }
        self.goals.push_back(goal);
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Goal> {
        self.goals.iter()
    }

    /// Copy out the contents, oldest first. The density fit is order
    /// independent, so callers mostly care about the multiset.
    pub fn to_vec(&self) -> Vec<Goal> {
        self.goals.iter().cloned().collect()
    }

    /// True once the buffer holds at least two distinct goals — the
    /// threshold below which fitting a density model is pointless.
    pub fn has_two_distinct(&self) -> bool {
        match self.goals.front() {
            None => false,
            Some(first) => self.goals.iter().any(|g| g != first),
        }
    }
}

/// Replay storage: a FIFO ring of whole trajectories with a transition-count
/// capacity. All stored trajectories must share one length, which makes
/// uniform transition sampling a plain index calculation.
#[derive(Clone, Debug)]
pub struct TransitionBuffer {
    trajectories: VecDeque<Trajectory>,
    capacity: usize,
    transitions: usize,
    episode_len: Option<usize>,
}

impl TransitionBuffer {
    pub fn new(capacity: usize) -> Result<TransitionBuffer> {
        if capacity == 0 {
            return Err(Error::InvalidConfig(
                "transition buffer capacity must be positive".into(),
            ));
        }
        Ok(TransitionBuffer {
            trajectories: VecDeque::new(),
            capacity,
            transitions: 0,
            episode_len: None,
        })
    }

    pub fn len_transitions(&self) -> usize {
        self.transitions
    }

    pub fn len_trajectories(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions == 0
    }

    fn store(&mut self, traj: Trajectory) -> Result<()> {
        traj.validate()?;
        if traj.len() > self.capacity {
            return Err(Error::InvalidConfig(alloc::format!(
                "trajectory of {} transitions exceeds buffer capacity {}",
                traj.len(),
                self.capacity
            )));
        }
        match self.episode_len {
            None => self.episode_len = Some(traj.len()),
            Some(t) if t != traj.len() => {
                return Err(Error::MalformedTrajectory(
                    "trajectory length differs from previously stored episodes",
                ));
            }
            Some(_) => {}
        }
        while self.transitions + traj.len() > self.capacity {
            // Whole-episode FIFO eviction.
            let evicted = self.trajectories.pop_front().expect("count/queue out of sync");
            self.transitions -= evicted.len();
        }
        self.transitions += traj.len();
        self.trajectories.push_back(traj);
        Ok(())
    }

    /// Locate a transition by its flat index over the stored transitions.
    fn locate(&self, flat: usize) -> (&Trajectory, usize) {
        let t = self.episode_len.expect("buffer is non-empty");
        (&self.trajectories[flat / t], flat % t)
    }
}

/// Store an episode and feed both goal rings: one achieved goal per step
/// plus the episode's desired goal.
pub fn store_trajectory(
    buf: &mut TransitionBuffer,
    ag_buf: &mut GoalBuffer,
    dg_buf: &mut GoalBuffer,
    traj: Trajectory,
) -> Result<()> {
    traj.validate()?;
    for g in &traj.achieved_goals {
        ag_buf.push(g.clone());
    }
    dg_buf.push(traj.desired_goal.clone());
    buf.store(traj)
}

/// Draw a hindsight batch: `count` uniform transitions, each relabeled with
/// probability `spec.replay_k / (replay_k + 1)` to an achieved goal from a
/// strictly later step of its own episode (the final step of an episode has
/// no future and always keeps its goal). Relabeled rewards are recomputed
/// against the next state's achieved goal.
pub fn sample_her_batch(
    buf: &TransitionBuffer,
    spec: &RelabelSpec,
    reward_spec: &RewardSpec,
    goal_map: &dyn Fn(&State) -> Goal,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Transition>> {
    if buf.is_empty() {
        return Err(Error::Empty("transition buffer"));
    }
    let Strategy::Future = spec.strategy;
    let p = spec.relabel_probability();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (traj, i) = buf.locate(rng.gen_range(0..buf.len_transitions()));
        let relabel = rng.gen::<f64>() < p;
        let horizon = traj.len();
        if relabel && i + 1 < horizon {
            let future = rng.gen_range(i + 1..horizon);
            let goal = traj.achieved_goals[future].clone();
            let t = &traj.transitions[i];
            let reward = sparse_reward(&goal_map(&t.next_state), &goal, reward_spec)?;
            out.push(Transition {
                state: t.state.clone(),
                action: t.action.clone(),
                goal,
                reward,
                next_state: t.next_state.clone(),
            });
        } else {
            out.push(traj.transitions[i].clone());
        }
    }
    Ok(out)
}

/// Pair `count` uniform stored transitions with goals drawn uniformly from
/// the curriculum batch's selected+augmented union, recomputing rewards.
/// States and actions are reused untouched.
pub fn augment_transitions(
    buf: &TransitionBuffer,
    batch: &CurriculumBatch,
    reward_spec: &RewardSpec,
    goal_map: &dyn Fn(&State) -> Goal,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Transition>> {
    if buf.is_empty() {
        return Err(Error::Empty("transition buffer"));
    }
    let union_len = batch.selected.len() + batch.augmented.len();
    if union_len == 0 {
        return Err(Error::Empty("curriculum goal union"));
    }
    let pick_goal = |idx: usize| -> &Goal {
        if idx < batch.selected.len() {
            &batch.selected[idx]
        } else {
            &batch.augmented[idx - batch.selected.len()]
        }
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (traj, i) = buf.locate(rng.gen_range(0..buf.len_transitions()));
        let goal = pick_goal(rng.gen_range(0..union_len)).clone();
        let t = &traj.transitions[i];
        let reward = sparse_reward(&goal_map(&t.next_state), &goal, reward_spec)?;
        out.push(Transition {
            state: t.state.clone(),
            action: t.action.clone(),
            goal,
            reward,
            next_state: t.next_state.clone(),
        });
    }
    Ok(out)
}

/// Merge the hindsight batch with the augmented batch and shuffle, so the
/// optimizer sees one homogeneous update batch.
pub fn compose_update_batch(
    her: Vec<Transition>,
    aug: Vec<Transition>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Transition>> {
    if her.is_empty() {
        return Err(Error::Empty("hindsight batch"));
    }
    let mut all = her;
    all.extend(aug);
    all.shuffle(rng);
    Ok(all)
}
