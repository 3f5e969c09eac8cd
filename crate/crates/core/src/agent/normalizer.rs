//! Running input normalization.
//!
//! Keeps per-dimension count/sum/sum-of-squares so the mean and standard
//! deviation can be folded in online, then maps inputs to
//! `clamp((x - mean) / max(std, floor), -clip, clip)`. The floor keeps
//! constant dimensions (e.g. a wall coordinate that never moves) from
//! exploding the quotient.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer {
    dim: usize,
    count: f64,
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    /// Lower bound on the standard deviation used for scaling.
    pub floor: f64,
    /// Symmetric clamp applied after scaling.
    pub clip: f64,
}

impl Normalizer {
    pub fn new(dim: usize, floor: f64, clip: f64) -> Normalizer {
        Normalizer { dim, count: 0.0, sum: vec![0.0; dim], sumsq: vec![0.0; dim], floor, clip }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    /// Fold one observation into the running statistics.
    pub fn update(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.count += 1.0;
        for (i, v) in x.iter().enumerate() {
            self.sum[i] += v;
            self.sumsq[i] += v * v;
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        if self.count == 0.0 {
            0.0
        } else {
            self.sum[i] / self.count
        }
    }

    /// Floored standard deviation along dimension `i`.
    pub fn std(&self, i: usize) -> f64 {
        if self.count == 0.0 {
            return 1.0_f64.max(self.floor);
        }
        let mean = self.sum[i] / self.count;
        let var = (self.sumsq[i] / self.count - mean * mean).max(0.0);
        math::sqrt(var).max(self.floor)
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| ((x[i] - self.mean(i)) / self.std(i)).clamp(-self.clip, self.clip))
            .collect()
    }

    /// Internals for serialization.
    pub(crate) fn raw(&self) -> (f64, &[f64], &[f64]) {
        (self.count, &self.sum, &self.sumsq)
    }

    pub(crate) fn from_raw(
        dim: usize,
        floor: f64,
        clip: f64,
        count: f64,
        sum: Vec<f64>,
        sumsq: Vec<f64>,
    ) -> Option<Normalizer> {
        if sum.len() != dim || sumsq.len() != dim {
            return None;
        }
        Some(Normalizer { dim, count, sum, sumsq, floor, clip })
    }
}
