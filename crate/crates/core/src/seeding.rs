//! Deterministic RNG stream derivation.
//!
//! Every source of randomness in a run is a ChaCha8 stream derived from the
//! master seed plus a small label (which subsystem, which epoch, which
//! episode). Streams are independent of collection order, which is what lets
//! parallel episode collection reproduce single-threaded results exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Labels for the independent randomness consumers within a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Network weight initialization.
    Init,
    /// Per-epoch curriculum batch construction.
    Curriculum,
    /// Per-episode exploration: resets, noise, goal replacement.
    Episode,
    /// Per-epoch replay sampling for gradient updates.
    Update,
    /// Per-episode evaluation rollouts.
    Eval,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::Curriculum => 2,
            Stream::Episode => 3,
            Stream::Update => 4,
            Stream::Eval => 5,
        }
    }
}

/// One round of splitmix64, the standard 64-bit finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse `(master, stream, a, b)` into a single well-mixed 64-bit seed.
pub fn mix(master: u64, stream: Stream, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ stream.tag());
    h = splitmix64(h ^ a);
    splitmix64(h ^ b)
}

/// A ChaCha8 generator for the given labeled stream.
pub fn rng(master: u64, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(master, stream, a, b))
}
