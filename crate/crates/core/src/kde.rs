//! Gaussian kernel density estimation over goal sets.
//!
//! The curriculum fits one model over recently achieved goals and one over
//! recently desired goals each epoch, then queries both heavily. An isotropic
//! Gaussian kernel with a single scalar bandwidth is enough at goal-space
//! dimensions of two or three, and keeps evaluation a straight sum of
//! exponentials:
//!
//! ```text
//! density(g) = (1/n) * (2*pi*h^2)^(-d/2) * sum_j exp(-|g - x_j|^2 / (2 h^2))
//! ```
//!
//! The bandwidth follows Scott's rule, `h = sigma_hat * n^(-1/(d+4))`, where
//! `sigma_hat` averages the per-dimension sample standard deviations. A
//! degenerate sample set (all points identical, or a single point) falls back
//! to a small fixed bandwidth so the model stays evaluable.

use alloc::vec::Vec;

use crate::math;
use crate::types::Goal;
use crate::{Error, Result};

/// Bandwidth used when the sample spread is zero.
pub const BANDWIDTH_FLOOR: f64 = 1e-3;

/// A fitted kernel density model. Construction copies the samples; the model
/// is immutable afterwards and cheap to query.
#[derive(Clone, Debug)]
pub struct DensityModel {
    dim: usize,
    n: usize,
    /// Sample coordinates, row-major `n x dim`.
    samples: Vec<f64>,
    bandwidth: f64,
    /// `ln((2*pi*h^2)^(-d/2) / n)`, precomputed.
    log_norm: f64,
}

impl DensityModel {
    /// Fit with the bandwidth chosen by Scott's rule.
    pub fn fit(goals: &[Goal]) -> Result<DensityModel> {
        let (dim, n, samples) = flatten(goals)?;
        let sigma = mean_std(&samples, n, dim);
        let mut bandwidth = sigma * math::powf(n as f64, -1.0 / (dim as f64 + 4.0));
        if !math::positive(bandwidth) {
            bandwidth = BANDWIDTH_FLOOR;
        }
        Ok(DensityModel::assemble(dim, n, samples, bandwidth))
    }

    /// Fit with an explicit bandwidth (useful for tests and diagnostics).
    pub fn with_bandwidth(goals: &[Goal], bandwidth: f64) -> Result<DensityModel> {
        if !math::positive(bandwidth) {
            return Err(Error::InvalidConfig(alloc::format!(
                "bandwidth must be finite and positive, got {bandwidth}"
            )));
        }
        let (dim, n, samples) = flatten(goals)?;
        Ok(DensityModel::assemble(dim, n, samples, bandwidth))
    }

    fn assemble(dim: usize, n: usize, samples: Vec<f64>, bandwidth: f64) -> DensityModel {
        let log_norm = -(dim as f64 / 2.0)
            * math::ln(2.0 * core::f64::consts::PI * bandwidth * bandwidth)
            - math::ln(n as f64);
        DensityModel { dim, n, samples, bandwidth, log_norm }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Kernel density at `g`. Non-negative and finite everywhere; far from
    /// all samples the sum can underflow to zero, use [`Self::log_density`]
    /// when tail magnitudes matter.
    pub fn density(&self, g: &Goal) -> Result<f64> {
        self.check_dim(g)?;
        let inv_two_h2 = 1.0 / (2.0 * self.bandwidth * self.bandwidth);
        let mut sum = 0.0;
        for row in self.samples.chunks_exact(self.dim) {
            sum += math::exp(-sq_dist(row, g.as_slice()) * inv_two_h2);
        }
        Ok(math::exp(self.log_norm) * sum)
    }

    /// Log of [`Self::density`], computed with log-sum-exp so it stays
    /// finite even where the plain density underflows.
    pub fn log_density(&self, g: &Goal) -> Result<f64> {
        self.check_dim(g)?;
        let inv_two_h2 = 1.0 / (2.0 * self.bandwidth * self.bandwidth);
        let mut max_t = f64::NEG_INFINITY;
        let mut ts = Vec::with_capacity(self.n);
        for row in self.samples.chunks_exact(self.dim) {
            let t = -sq_dist(row, g.as_slice()) * inv_two_h2;
            if t > max_t {
                max_t = t;
            }
            ts.push(t);
        }
        let sum: f64 = ts.iter().map(|t| math::exp(t - max_t)).sum();
        Ok(self.log_norm + max_t + math::ln(sum))
    }

    fn check_dim(&self, g: &Goal) -> Result<()> {
        if g.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: g.len() });
        }
        Ok(())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Validate shapes and flatten the goal set to a row-major matrix.
fn flatten(goals: &[Goal]) -> Result<(usize, usize, Vec<f64>)> {
    let Some(first) = goals.first() else {
        return Err(Error::Empty("goal sample set"));
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::Empty("goal dimension"));
    }
    let mut samples = Vec::with_capacity(goals.len() * dim);
    for g in goals {
        if g.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: g.len() });
        }
        samples.extend_from_slice(g.as_slice());
    }
    Ok((dim, goals.len(), samples))
}

/// Mean of the per-dimension sample standard deviations (n-1 denominator).
/// Zero for a single sample or identical samples.
fn mean_std(samples: &[f64], n: usize, dim: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for d in 0..dim {
        let mut mean = 0.0;
        for row in 0..n {
            mean += samples[row * dim + d];
        }
        mean /= n as f64;
        let mut ss = 0.0;
        for row in 0..n {
            let dev = samples[row * dim + d] - mean;
            ss += dev * dev;
        }
        acc += math::sqrt(ss / (n - 1) as f64);
    }
    acc / dim as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{self, Stream};
    use alloc::vec;
    use rand::Rng;

    fn g(v: &[f64]) -> Goal {
        Goal(v.to_vec())
    }

    #[test]
    fn single_sample_unit_bandwidth_matches_the_normal_pdf() {
        let m = DensityModel::with_bandwidth(&[g(&[0.0])], 1.0).unwrap();
        let at0 = m.density(&g(&[0.0])).unwrap();
        let at1 = m.density(&g(&[1.0])).unwrap();
        assert!((at0 - 0.3989422804014327).abs() < 1e-12, "peak off: {at0}");
        assert!((at1 - 0.24197072451914337).abs() < 1e-12, "one sigma off: {at1}");
        let l0 = m.log_density(&g(&[0.0])).unwrap();
        assert!((l0 - (-0.9189385332046727)).abs() < 1e-12, "log peak off: {l0}");
    }

    #[test]
    fn scott_bandwidth_on_standard_normal_draws() {
        let mut rng = seeding::rng(11, Stream::Init, 0, 0);
        let pts: Vec<Goal> = (0..1000)
            .map(|_| g(&[crate::math::standard_normal(&mut rng), crate::math::standard_normal(&mut rng)]))
            .collect();
        let m = DensityModel::fit(&pts).unwrap();
        // sigma_hat ~ 1, n^(-1/6) = 0.31623; allow for sampling error in sigma_hat.
        assert!(
            (m.bandwidth() - 0.31622776601683794).abs() < 0.02,
            "Scott bandwidth off: {}",
            m.bandwidth()
        );
    }

    #[test]
    fn identical_samples_fall_back_to_the_floor_bandwidth() {
        let pts = vec![g(&[0.25, 0.75]); 40];
        let m = DensityModel::fit(&pts).unwrap();
        assert_eq!(m.bandwidth(), BANDWIDTH_FLOOR);
        // Still evaluable and sharply peaked at the common point.
        let peak = m.density(&g(&[0.25, 0.75])).unwrap();
        assert!(peak.is_finite() && peak > 0.0);
    }

    #[test]
    fn single_sample_fit_uses_the_floor() {
        let m = DensityModel::fit(&[g(&[1.0, 2.0])]).unwrap();
        assert_eq!(m.bandwidth(), BANDWIDTH_FLOOR);
    }

    #[test]
    fn fit_rejects_empty_and_ragged_input() {
        assert_eq!(DensityModel::fit(&[]).unwrap_err(), Error::Empty("goal sample set"));
        let ragged = [g(&[0.0, 0.0]), g(&[1.0])];
        assert!(matches!(
            DensityModel::fit(&ragged).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn with_bandwidth_rejects_nonpositive_values() {
        assert!(DensityModel::with_bandwidth(&[g(&[0.0])], 0.0).is_err());
        assert!(DensityModel::with_bandwidth(&[g(&[0.0])], -1.0).is_err());
        assert!(DensityModel::with_bandwidth(&[g(&[0.0])], f64::NAN).is_err());
    }

    #[test]
    fn query_dimension_is_checked() {
        let m = DensityModel::with_bandwidth(&[g(&[0.0, 0.0])], 0.5).unwrap();
        assert!(m.density(&g(&[0.0])).is_err());
        assert!(m.log_density(&g(&[0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn log_density_survives_far_queries() {
        let mut rng = seeding::rng(3, Stream::Init, 0, 0);
        let pts: Vec<Goal> =
            (0..100).map(|_| g(&[rng.gen::<f64>(), rng.gen::<f64>()])).collect();
        let m = DensityModel::fit(&pts).unwrap();
        // 50 bandwidths past the farthest sample: the naive sum may
        // underflow to zero, the log must stay finite.
        let far = g(&[1.0 + 50.0 * m.bandwidth() + 1.0, 0.5]);
        let ld = m.log_density(&far).unwrap();
        assert!(ld.is_finite(), "log density blew up: {ld}");
        assert!(m.density(&far).unwrap() >= 0.0);
    }

    #[test]
    fn density_is_permutation_invariant() {
        let mut rng = seeding::rng(5, Stream::Init, 0, 0);
        let mut pts: Vec<Goal> =
            (0..64).map(|_| g(&[rng.gen::<f64>(), rng.gen::<f64>()])).collect();
        let m1 = DensityModel::fit(&pts).unwrap();
        pts.reverse();
        pts.swap(0, 31);
        let m2 = DensityModel::fit(&pts).unwrap();
        for q in [g(&[0.2, 0.3]), g(&[0.9, 0.1]), g(&[0.5, 0.5])] {
            let a = m1.density(&q).unwrap();
            let b = m2.density(&q).unwrap();
            // Summation order differs, so allow float round-off.
            assert!((a - b).abs() <= 1e-12 * a.max(b), "{a} vs {b}");
        }
    }

    #[test]
    fn density_is_translation_equivariant() {
        let mut rng = seeding::rng(6, Stream::Init, 0, 0);
        let pts: Vec<Goal> =
            (0..64).map(|_| g(&[rng.gen::<f64>(), rng.gen::<f64>()])).collect();
        let shift = [13.25, -4.5];
        let shifted: Vec<Goal> =
            pts.iter().map(|p| g(&[p.0[0] + shift[0], p.0[1] + shift[1]])).collect();
        let m1 = DensityModel::fit(&pts).unwrap();
        let m2 = DensityModel::fit(&shifted).unwrap();
        for q in [g(&[0.1, 0.9]), g(&[0.4, 0.4])] {
            let a = m1.density(&q).unwrap();
            let b = m2.density(&g(&[q.0[0] + shift[0], q.0[1] + shift[1]])).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.max(b), "{a} vs {b}");
        }
    }

    #[test]
    fn density_decays_monotonically_beyond_the_samples() {
        let mut rng = seeding::rng(7, Stream::Init, 0, 0);
        let pts: Vec<Goal> =
            (0..50).map(|_| g(&[rng.gen::<f64>(), rng.gen::<f64>()])).collect();
        let m = DensityModel::fit(&pts).unwrap();
        // Walk outward along +x from past the sample cloud; use log space so
        // tail underflow cannot mask a violation.
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let q = g(&[2.0 + 0.5 * k as f64, 0.5]);
            let ld = m.log_density(&q).unwrap();
            assert!(ld < prev, "density failed to decay at step {k}");
            prev = ld;
        }
    }

    #[test]
    fn grid_integral_is_close_to_one() {
        let mut rng = seeding::rng(9, Stream::Init, 0, 0);
        let pts: Vec<Goal> = (0..400)
            .map(|_| g(&[crate::math::standard_normal(&mut rng), crate::math::standard_normal(&mut rng)]))
            .collect();
        let m = DensityModel::fit(&pts).unwrap();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &pts {
            for d in 0..2 {
                lo[d] = lo[d].min(p.0[d]);
                hi[d] = hi[d].max(p.0[d]);
            }
        }
        let pad = 4.0 * m.bandwidth();
        let steps = 120;
        let (dx, dy) = (
            (hi[0] - lo[0] + 2.0 * pad) / steps as f64,
            (hi[1] - lo[1] + 2.0 * pad) / steps as f64,
        );
        let mut integral = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let x = lo[0] - pad + (i as f64 + 0.5) * dx;
                let y = lo[1] - pad + (j as f64 + 0.5) * dy;
                integral += m.density(&g(&[x, y])).unwrap() * dx * dy;
            }
        }
        assert!((0.95..=1.05).contains(&integral), "mass not conserved: {integral}");
    }
}
