//! Density-guided goal selection.
//!
//! Each epoch the trainer fits a density model over recently *achieved*
//! goals and one over recently *desired* goals, then builds a batch of
//! exploration goals in four moves:
//!
//! 1. **Prioritize** achieved goals inversely to their density, so rarely
//!    visited regions come first ([`density_priorities`]).
//! 2. **Select** a batch from those priorities with replacement
//!    ([`sample_achieved`]).
//! 3. **Augment** the selection with jittered copies inside a small ball,
//!    thickening the frontier ([`augment_goals`]).
//! 4. **Rank** the union by the entropy of each goal's desired-goal density
//!    and keep the top slice as the exploration pool ([`entropy_rank`]).
//!
//! At episode start [`maybe_replace_goal`] swaps the environment's goal for
//! a pool goal with probability `epsilon = alpha * exp(-2 * success_rate)`,
//! so the detour through low-density goals fades out as the task gets
//! solved.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::kde::DensityModel;
use crate::math;
use crate::types::Goal;
use crate::{Error, Result};

/// Sizes and knobs for batch construction. Defaults match the scale the
/// training harness runs at.
#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumConfig {
    /// Achieved goals drawn per epoch (with replacement).
    pub select_size: usize,
    /// Jittered copies added to the selection; zero disables augmentation.
    pub augment_size: usize,
    /// Exploration pool size kept after entropy ranking.
    pub pool_size: usize,
    /// Radius of the augmentation ball. Must not exceed the reward
    /// tolerance of the active environment, so an augmented goal still
    /// counts as hitting its base goal.
    pub aug_radius: f64,
    /// Scale of the exploration-goal schedule, in (0, 1).
    pub alpha: f64,
}

impl Default for CurriculumConfig {
    fn default() -> CurriculumConfig {
        CurriculumConfig {
            select_size: 256,
            augment_size: 128,
            pool_size: 100,
            aug_radius: 0.03,
            alpha: 0.5,
        }
    }
}

impl CurriculumConfig {
    /// Check internal consistency; `delta` is the active environment's
    /// reward tolerance.
    pub fn validate(&self, delta: f64) -> Result<()> {
        if self.select_size == 0 {
            return Err(Error::InvalidConfig("select_size must be positive".into()));
        }
        if self.pool_size == 0 {
            return Err(Error::InvalidConfig("pool_size must be positive".into()));
        }
        if self.pool_size > self.select_size + self.augment_size {
            return Err(Error::InvalidConfig(alloc::format!(
                "pool_size {} exceeds selected+augmented {}",
                self.pool_size,
                self.select_size + self.augment_size
            )));
        }
        if !math::positive(self.aug_radius) || self.aug_radius > delta {
            return Err(Error::InvalidConfig(alloc::format!(
                "aug_radius must be in (0, delta={delta}], got {}",
                self.aug_radius
            )));
        }
        if !math::positive(self.alpha) || self.alpha >= 1.0 {
            return Err(Error::InvalidConfig(alloc::format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-goal priorities derived from achieved-goal density: raw densities,
/// min-shifted normalization, and the final sampling distribution.
#[derive(Clone, Debug)]
pub struct PriorityWeights {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Score achieved goals so that *low* density means *high* sampling
/// probability.
///
/// Densities are shifted by their minimum and normalized to sum to one,
/// then pushed through a softmax of `1 - normalized`. When all densities
/// are (numerically) equal the normalization is skipped and the
/// distribution is uniform.
pub fn density_priorities(goals: &[Goal], model: &DensityModel) -> Result<PriorityWeights> {
    if goals.is_empty() {
        return Err(Error::Empty("achieved goal buffer"));
    }
    let mut raw = Vec::with_capacity(goals.len());
    for g in goals {
        let d = model.density(g)?;
        if !d.is_finite() {
            return Err(Error::NonFinite("goal density"));
        }
        raw.push(d);
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let spread: f64 = raw.iter().map(|r| r - min).sum();
    let normalized: Vec<f64> = if spread < 1e-12 {
        // Degenerate: every goal equally (un)common.
        vec![0.0; raw.len()]
    } else {
        raw.iter().map(|r| (r - min) / spread).collect()
    };
    // Softmax of (1 - normalized). Exponents live in [e^0, e^1]; no
    // stabilization needed.
    let weights: Vec<f64> = normalized.iter().map(|n| math::exp(1.0 - n)).collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    Ok(PriorityWeights { raw, normalized, probs })
}

/// Draw `count` goals (with replacement) according to `weights.probs`.
pub fn sample_achieved(
    goals: &[Goal],
    weights: &PriorityWeights,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Goal>> {
    if goals.is_empty() {
        return Err(Error::Empty("achieved goal buffer"));
    }
    if goals.len() != weights.probs.len() {
        return Err(Error::DimensionMismatch {
            expected: goals.len(),
            got: weights.probs.len(),
        });
    }
    let mut cdf = Vec::with_capacity(goals.len());
    let mut acc = 0.0;
    for p in &weights.probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let r = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|c| *c <= r).min(goals.len() - 1);
        out.push(goals[idx].clone());
    }
    Ok(out)
}

/// Scatter `cfg.augment_size` jittered copies of the selected goals:
/// each copy is a uniform draw from the open ball of radius
/// `cfg.aug_radius` around a uniformly chosen base goal.
pub fn augment_goals(
    selected: &[Goal],
    cfg: &CurriculumConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Goal>> {
    if selected.is_empty() {
        return Err(Error::Empty("selected goal set"));
    }
    if !math::positive(cfg.aug_radius) {
        return Err(Error::InvalidConfig(alloc::format!(
            "aug_radius must be positive, got {}",
            cfg.aug_radius
        )));
    }
    let dim = selected[0].len();
    let mut out = Vec::with_capacity(cfg.augment_size);
    for _ in 0..cfg.augment_size {
        let base = &selected[rng.gen_range(0..selected.len())];
        let offset = ball_offset(dim, cfg.aug_radius, rng);
        out.push(Goal(base.0.iter().zip(&offset).map(|(b, o)| b + o).collect()));
    }
    Ok(out)
}

/// Uniform draw from the open ball of the given radius: isotropic direction
/// times `radius * U^(1/dim)`, which is uniform in volume, not in radius.
fn ball_offset(dim: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..dim).map(|_| math::standard_normal(rng)).collect();
        let norm = math::sqrt(dir.iter().map(|x| x * x).sum());
        if norm < 1e-12 {
            continue; // essentially impossible, but keeps the math safe
        }
        let r = radius * math::powf(rng.gen::<f64>(), 1.0 / dim as f64);
        return dir.into_iter().map(|x| x / norm * r).collect();
    }
}

/// Entropy scores for a set of non-negative weights (densities under the
/// desired-goal model).
#[derive(Clone, Debug)]
pub struct EntropyScores {
    /// `-p_i * ln(p_i)` of the batch-normalized weights, input order.
    pub entropy: Vec<f64>,
    /// Entropies normalized to sum to one, input order.
    pub normalized: Vec<f64>,
    /// Input indices sorted by normalized entropy, descending; ties keep
    /// input order.
    pub order: Vec<usize>,
}

/// Compute batch-normalized entropy scores from raw density weights.
///
/// Degenerate batches (all weights zero, or a single candidate whose
/// entropy is exactly zero) fall back to uniform normalized scores so the
/// result always sums to one.
pub fn entropy_scores(weights: &[f64]) -> Result<EntropyScores> {
    if weights.is_empty() {
        return Err(Error::Empty("entropy candidate set"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFinite("entropy weights"));
    }
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let entropy: Vec<f64> =
        probs.iter().map(|p| if *p > 0.0 { -p * math::ln(*p) } else { 0.0 }).collect();
    let ent_total: f64 = entropy.iter().sum();
    let normalized: Vec<f64> = if ent_total > 0.0 {
        entropy.iter().map(|e| e / ent_total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: equal scores keep their input order.
    order.sort_by(|a, b| normalized[*b].partial_cmp(&normalized[*a]).unwrap());
    Ok(EntropyScores { entropy, normalized, order })
}

/// Rank candidate goals by the entropy of their desired-goal density,
/// highest first. Returns the reordered goals with their normalized
/// entropy scores.
pub fn entropy_rank(
    candidates: &[Goal],
    desired: &DensityModel,
) -> Result<(Vec<Goal>, Vec<f64>)> {
    let mut weights = Vec::with_capacity(candidates.len());
    for g in candidates {
        weights.push(desired.density(g)?);
    }
    let scores = entropy_scores(&weights)?;
    let goals = scores.order.iter().map(|i| candidates[*i].clone()).collect();
    let ents = scores.order.iter().map(|i| scores.normalized[*i]).collect();
    Ok((goals, ents))
}

/// One epoch's worth of curriculum goals.
#[derive(Clone, Debug)]
pub struct CurriculumBatch {
    /// Achieved goals drawn by density priority.
    pub selected: Vec<Goal>,
    /// Jittered copies of the selection (empty when augmentation is off).
    pub augmented: Vec<Goal>,
    /// Top entropy-ranked slice of `selected + augmented`; exploration
    /// goals are drawn from here.
    pub pool: Vec<Goal>,
    /// Normalized entropy per union member, in `selected + augmented`
    /// order. Sums to one.
    pub entropies: Vec<f64>,
}

impl CurriculumBatch {
    /// Union of selected and augmented goals in construction order,
    /// aligned with `entropies`.
    pub fn union(&self) -> impl Iterator<Item = &Goal> {
        self.selected.iter().chain(self.augmented.iter())
    }
}

/// Assemble the epoch's curriculum batch from the achieved-goal buffer and
/// the two fitted density models.
pub fn build_batch(
    achieved: &[Goal],
    ag_model: &DensityModel,
    dg_model: &DensityModel,
    cfg: &CurriculumConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CurriculumBatch> {
    let weights = density_priorities(achieved, ag_model)?;
    let selected = sample_achieved(achieved, &weights, cfg.select_size, rng)?;
    let augmented = if cfg.augment_size > 0 {
        augment_goals(&selected, cfg, rng)?
    } else {
        Vec::new()
    };

    let mut union_weights = Vec::with_capacity(selected.len() + augmented.len());
    for g in selected.iter().chain(augmented.iter()) {
        union_weights.push(dg_model.density(g)?);
    }
    let scores = entropy_scores(&union_weights)?;

    let take = cfg.pool_size.min(scores.order.len());
    let union: Vec<&Goal> = selected.iter().chain(augmented.iter()).collect();
    let pool = scores.order[..take].iter().map(|i| union[*i].clone()).collect();

    Ok(CurriculumBatch { selected, augmented, pool, entropies: scores.normalized })
}

/// Exploration-goal schedule: `epsilon = alpha * exp(-2 * success_rate)`,
/// fed by the previous epoch's evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExploreSchedule {
    alpha: f64,
    success_rate: f64,
}

impl ExploreSchedule {
    /// A fresh schedule; before any evaluation the success rate is zero,
    /// so the first epoch explores at the full rate `alpha`.
    pub fn new(alpha: f64) -> Result<ExploreSchedule> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "alpha must be in (0, 1), got {alpha}"
            )));
        }
        Ok(ExploreSchedule { alpha, success_rate: 0.0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Feed the latest evaluation result.
    pub fn record_success_rate(&mut self, rate: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidConfig(alloc::format!(
                "success rate must be in [0, 1], got {rate}"
            )));
        }
        self.success_rate = rate;
        Ok(())
    }

    /// Current probability of replacing the environment goal.
    pub fn epsilon(&self) -> f64 {
        self.alpha * math::exp(-2.0 * self.success_rate)
    }
}

/// With probability `schedule.epsilon()`, swap the environment's goal for a
/// uniform draw from the exploration pool. An empty pool keeps the
/// environment goal (and logs, since it indicates a misconfigured batch).
pub fn maybe_replace_goal(
    env_goal: Goal,
    batch: &CurriculumBatch,
    schedule: &ExploreSchedule,
    rng: &mut ChaCha8Rng,
) -> Goal {
    if rng.gen::<f64>() >= schedule.epsilon() {
        return env_goal;
    }
    if batch.pool.is_empty() {
        log::warn!("exploration pool is empty; keeping the environment goal");
        return env_goal;
    }
    batch.pool[rng.gen_range(0..batch.pool.len())].clone()
}
