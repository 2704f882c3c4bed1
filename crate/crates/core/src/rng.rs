//! Random number streams.
//!
//! Every random draw comes from a ChaCha8 generator addressed by
//! `(seed, stream)`. Particle slot `p` owns stream `p` for the whole run, so
//! results do not depend on how particles are scheduled across threads.
//! Resampling uses its own stream, and synthetic truths use another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use alloc::vec::Vec;

pub type StreamRng = ChaCha8Rng;

pub const RESAMPLE_STREAM: u64 = u64::MAX;
pub const TRUTH_STREAM: u64 = u64::MAX - 1;
pub const PRIOR_MC_STREAM: u64 = u64::MAX - 2;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for repetition `counter` of an experiment (SplitMix64 finalizer).
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

pub fn standard_normal_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v = alloc::vec![0.0; n];
    fill_standard_normal(rng, &mut v);
    v
}

/// Per-slot generators plus the shared resampling stream for one run.
#[derive(Debug, Clone)]
pub struct RngBank {
    pub slots: Vec<StreamRng>,
    pub resample: StreamRng,
}

impl RngBank {
    pub fn new(seed: u64, n_slots: usize) -> Self {
        Self {
            slots: (0..n_slots as u64).map(|s| stream_rng(seed, s)).collect(),
            resample: stream_rng(seed, RESAMPLE_STREAM),
        }
    }
}
