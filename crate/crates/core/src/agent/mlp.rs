//! Minimal fully-connected networks with hand-written reverse-mode
//! gradients.
//!
//! Parameters live in one flat `Vec<f64>` (`[W0 | b0 | W1 | b1 | ...]`,
//! weights row-major `out x in`), which keeps the optimizer, target-network
//! blending, finite-difference checks and snapshot serialization all
//! straight array walks over the same layout. Hidden layers are ReLU; the
//! output head is `tanh` for actors and identity for critics.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::math;

/// Output-layer activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    Tanh,
    Identity,
}

/// Per-layer slice boundaries into the flat parameter vector.
#[derive(Clone, Debug)]
struct Layout {
    w_off: usize,
    b_off: usize,
    rows: usize,
    cols: usize,
}

/// A feed-forward network: `sizes = [input, hidden..., output]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    head: Head,
    params: Vec<f64>,
}

/// Forward-pass bookkeeping needed by [`Mlp::backward`]: layer inputs and
/// pre-activations.
pub struct Cache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

/// Flat gradient accumulator matching an [`Mlp`]'s parameter layout.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub flat: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Gradients {
        Gradients { flat: vec![0.0; mlp.params.len()] }
    }

    pub fn reset(&mut self) {
        self.flat.iter_mut().for_each(|g| *g = 0.0);
    }
}

impl Mlp {
    fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn layouts(&self) -> impl Iterator<Item = Layout> + '_ {
        let mut off = 0;
        self.sizes.windows(2).map(move |w| {
            let (cols, rows) = (w[0], w[1]);
            let l = Layout { w_off: off, b_off: off + rows * cols, rows, cols };
            off += rows * cols + rows;
            l
        })
    }

    /// Random initialization: hidden layers uniform in `+-1/sqrt(fan_in)`,
    /// output layer uniform in `+-3e-3` so fresh actors emit near-zero
    /// actions and fresh critics near-zero values.
    pub fn new(sizes: Vec<usize>, head: Head, rng: &mut ChaCha8Rng) -> Mlp {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert!(sizes.iter().all(|s| *s > 0), "zero-width layer");
        let mut mlp = Mlp { params: vec![0.0; Mlp::param_count(&sizes)], sizes, head };
        let n_layers = mlp.sizes.len() - 1;
        let layouts: Vec<Layout> = mlp.layouts().collect();
        for (l, lay) in layouts.iter().enumerate() {
            let bound =
                if l + 1 == n_layers { 3e-3 } else { 1.0 / math::sqrt(lay.cols as f64) };
            for i in 0..lay.rows * lay.cols {
                mlp.params[lay.w_off + i] = rng.gen_range(-bound..bound);
            }
            // Biases start at zero.
        }
        mlp
    }

    /// All-zero parameters (useful as a stand-in for "untrained").
    pub fn zeroed(sizes: Vec<usize>, head: Head) -> Mlp {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        assert!(sizes.iter().all(|s| *s > 0), "zero-width layer");
        Mlp { params: vec![0.0; Mlp::param_count(&sizes)], sizes, head }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Rebuild from a flat parameter vector (snapshot decoding).
    pub fn from_params(sizes: Vec<usize>, head: Head, params: Vec<f64>) -> Option<Mlp> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return None;
        }
        if params.len() != Mlp::param_count(&sizes) {
            return None;
        }
        Some(Mlp { sizes, head, params })
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_cached(input).output
    }

    /// Forward pass that records what [`Mlp::backward`] needs.
    pub fn forward_cached(&self, input: &[f64]) -> Cache {
        assert_eq!(input.len(), self.input_dim(), "input width mismatch");
        let n_layers = self.sizes.len() - 1;
        let mut inputs = Vec::with_capacity(n_layers);
        let mut pre = Vec::with_capacity(n_layers);
        let mut x = input.to_vec();
        for (l, lay) in self.layouts().enumerate() {
            let mut z = vec![0.0; lay.rows];
            for (r, zr) in z.iter_mut().enumerate() {
                let row = &self.params[lay.w_off + r * lay.cols..lay.w_off + (r + 1) * lay.cols];
                let mut acc = self.params[lay.b_off + r];
                for (w, xi) in row.iter().zip(&x) {
                    acc += w * xi;
                }
                *zr = acc;
            }
            inputs.push(x);
            let last = l + 1 == n_layers;
            let y: Vec<f64> = if last {
                match self.head {
                    Head::Tanh => z.iter().map(|v| math::tanh(*v)).collect(),
                    Head::Identity => z.clone(),
                }
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
            pre.push(z);
            x = y;
        }
        Cache { inputs, pre, output: x }
    }

    /// Reverse pass. `d_out` is the loss gradient at the network output;
    /// returns the gradient at the input. When `grads` is given, parameter
    /// gradients are *accumulated* into it (callers reset between batches);
    /// pass `None` to only propagate through (e.g. a critic used as a
    /// frozen scorer for the actor update).
    pub fn backward(
        &self,
        cache: &Cache,
        d_out: &[f64],
        mut grads: Option<&mut Gradients>,
    ) -> Vec<f64> {
        assert_eq!(d_out.len(), self.output_dim(), "output gradient width mismatch");
        let n_layers = self.sizes.len() - 1;
        let layouts: Vec<Layout> = self.layouts().collect();
        let mut d = d_out.to_vec();
        for l in (0..n_layers).rev() {
            let lay = &layouts[l];
            let z = &cache.pre[l];
            let x = &cache.inputs[l];
            // Through the activation.
            let mut dz = vec![0.0; lay.rows];
            if l + 1 == n_layers {
                match self.head {
                    Head::Tanh => {
                        for ((dzr, dr), y) in dz.iter_mut().zip(&d).zip(&cache.output) {
                            *dzr = dr * (1.0 - y * y);
                        }
                    }
                    Head::Identity => dz.copy_from_slice(&d),
                }
            } else {
                for ((dzr, dr), zr) in dz.iter_mut().zip(&d).zip(z) {
                    *dzr = if *zr > 0.0 { *dr } else { 0.0 };
                }
            }
            // Parameter gradients.
            if let Some(g) = grads.as_deref_mut() {
                for (r, dzr) in dz.iter().enumerate() {
                    let w_row = lay.w_off + r * lay.cols;
                    for (c, xc) in x.iter().enumerate() {
                        g.flat[w_row + c] += dzr * xc;
                    }
                    g.flat[lay.b_off + r] += dzr;
                }
            }
            // Input gradient for the next layer down.
            let mut dx = vec![0.0; lay.cols];
            for (r, dzr) in dz.iter().enumerate() {
                let row = &self.params[lay.w_off + r * lay.cols..lay.w_off + (r + 1) * lay.cols];
                for (dxc, wc) in dx.iter_mut().zip(row) {
                    *dxc += wc * dzr;
                }
            }
            d = dx;
        }
        d
    }

    /// Blend `src` into `self`: `self = rate * self + (1 - rate) * src`.
    /// With `rate = 1` the target never moves; with `rate = 0` it copies.
    pub fn blend_from(&mut self, src: &Mlp, rate: f64) {
        assert_eq!(self.sizes, src.sizes, "blending incompatible networks");
        for (t, s) in self.params.iter_mut().zip(&src.params) {
            *t = rate * *t + (1.0 - rate) * s;
        }
    }
}

/// Adam over an [`Mlp`]'s flat parameters, with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Adam {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: vec![0.0; n_params], v: vec![0.0; n_params] }
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) {
        assert_eq!(grads.flat.len(), self.m.len(), "gradient/optimizer mismatch");
        self.t += 1;
        let c1 = 1.0 - math::powf(self.beta1, self.t as f64);
        let c2 = 1.0 - math::powf(self.beta2, self.t as f64);
        for ((p, g), (m, v)) in mlp
            .params_mut()
            .iter_mut()
            .zip(&grads.flat)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (math::sqrt(v_hat) + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{self, Stream};

    fn rng(n: u64) -> ChaCha8Rng {
        seeding::rng(n, Stream::Init, 0, 0)
    }

    #[test]
    fn zeroed_tanh_network_outputs_zero() {
        let mlp = Mlp::zeroed(vec![4, 8, 2], Head::Tanh);
        assert_eq!(mlp.forward(&[0.3, -0.4, 1.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn tanh_head_bounds_the_output() {
        let mlp = Mlp::new(vec![3, 32, 32, 2], Head::Tanh, &mut rng(1));
        let y = mlp.forward(&[100.0, -50.0, 30.0]);
        assert!(y.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn forward_matches_a_hand_computed_two_layer_net() {
        // sizes [2, 2, 1]: W0 = [[1, 2], [3, 4]], b0 = [0.5, -10],
        // W1 = [[1, 1]], b1 = [0.25].
        let mut mlp = Mlp::zeroed(vec![2, 2, 1], Head::Identity);
        mlp.params_mut().copy_from_slice(&[
            1.0, 2.0, 3.0, 4.0, // W0
            0.5, -10.0, // b0
            1.0, 1.0, // W1
            0.25, // b1
        ]);
        // x = [1, 1]: z0 = [3.5, -3], relu -> [3.5, 0], out = 3.75.
        assert_eq!(mlp.forward(&[1.0, 1.0]), vec![3.75]);
    }

    #[test]
    fn param_count_matches_the_layout() {
        let mlp = Mlp::zeroed(vec![5, 7, 3], Head::Identity);
        assert_eq!(mlp.params().len(), 5 * 7 + 7 + 7 * 3 + 3);
    }

    fn loss(mlp: &Mlp, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
        let mut l = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let out = mlp.forward(x);
            for (o, t) in out.iter().zip(y) {
                l += (o - t) * (o - t);
            }
        }
        l / xs.len() as f64
    }

    /// Backprop vs central finite differences on a small regression loss.
    fn check_gradients(head: Head, seed: u64) {
        let mut r = rng(seed);
        let mlp = Mlp::new(vec![3, 12, 12, 2], head, &mut r);
        let xs: Vec<Vec<f64>> =
            (0..10).map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let ys: Vec<Vec<f64>> =
            (0..10).map(|_| (0..2).map(|_| r.gen_range(-0.9..0.9)).collect()).collect();

        let mut grads = Gradients::zeros_like(&mlp);
        for (x, y) in xs.iter().zip(&ys) {
            let cache = mlp.forward_cached(x);
            let d_out: Vec<f64> = cache
                .output()
                .iter()
                .zip(y)
                .map(|(o, t)| 2.0 * (o - t) / xs.len() as f64)
                .collect();
            mlp.backward(&cache, &d_out, Some(&mut grads));
        }

        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..mlp.params().len() {
            let mut plus = mlp.clone();
            plus.params_mut()[i] += h;
            let mut minus = mlp.clone();
            minus.params_mut()[i] -= h;
            let fd = (loss(&plus, &xs, &ys) - loss(&minus, &xs, &ys)) / (2.0 * h);
            let a = grads.flat[i];
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-4, "gradient mismatch: max rel err {worst:e}");
    }

    #[test]
    fn analytic_gradients_match_finite_differences_identity_head() {
        check_gradients(Head::Identity, 20);
    }

    #[test]
    fn analytic_gradients_match_finite_differences_tanh_head() {
        check_gradients(Head::Tanh, 21);
    }

    #[test]
    fn input_gradients_are_exact_too() {
        let mut r = rng(22);
        let mlp = Mlp::new(vec![4, 10, 3], Head::Tanh, &mut r);
        let x: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
        let cache = mlp.forward_cached(&x);
        let d_out = vec![1.0, -0.5, 0.25];
        let dx = mlp.backward(&cache, &d_out, None);
        let h = 1e-6;
        let scalar = |input: &[f64]| -> f64 {
            mlp.forward(input).iter().zip(&d_out).map(|(o, w)| o * w).sum()
        };
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (scalar(&xp) - scalar(&xm)) / (2.0 * h);
            assert!(
                (dx[i] - fd).abs() <= 1e-6 * dx[i].abs().max(fd.abs()).max(1.0),
                "input grad {i}: {} vs {fd}",
                dx[i]
            );
        }
    }

    #[test]
    fn adam_descends_a_quadratic() {
        // One parameter, loss (p - 3)^2: gradient descent must approach 3.
        let mut mlp = Mlp::zeroed(vec![1, 1], Head::Identity);
        let mut opt = Adam::new(0.05, mlp.params().len());
        for _ in 0..2000 {
            let p = mlp.params()[0];
            let grads = Gradients { flat: vec![2.0 * (p - 3.0), 0.0] };
            opt.step(&mut mlp, &grads);
        }
        assert!((mlp.params()[0] - 3.0).abs() < 1e-2, "Adam stalled at {}", mlp.params()[0]);
    }

    #[test]
    fn blend_with_rate_one_freezes_the_target() {
        let mut r = rng(23);
        let src = Mlp::new(vec![3, 8, 2], Head::Tanh, &mut r);
        let mut tgt = Mlp::new(vec![3, 8, 2], Head::Tanh, &mut r);
        let before = tgt.params().to_vec();
        tgt.blend_from(&src, 1.0);
        assert_eq!(tgt.params(), &before[..]);
    }

    #[test]
    fn blend_contracts_towards_the_source() {
        let mut r = rng(24);
        let src = Mlp::new(vec![3, 8, 2], Head::Tanh, &mut r);
        let mut tgt = Mlp::new(vec![3, 8, 2], Head::Tanh, &mut r);
        let gap_before: Vec<f64> =
            tgt.params().iter().zip(src.params()).map(|(t, s)| t - s).collect();
        tgt.blend_from(&src, 0.95);
        for (i, (t, s)) in tgt.params().iter().zip(src.params()).enumerate() {
            let expect = 0.95 * gap_before[i];
            assert!(
                ((t - s) - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                "gap should shrink by exactly the blend rate"
            );
        }
    }

    #[test]
    fn from_params_validates_the_length() {
        assert!(Mlp::from_params(vec![2, 2], Head::Tanh, vec![0.0; 6]).is_some());
        assert!(Mlp::from_params(vec![2, 2], Head::Tanh, vec![0.0; 5]).is_none());
        assert!(Mlp::from_params(vec![2], Head::Tanh, vec![]).is_none());
    }
}
