use alloc::vec::Vec;

use crate::math::sqrt;
use crate::mcmc::{AcceptanceStats, ChainState};
use crate::problem::EvalCounts;
use crate::rng::StreamRng;

/// Weighted particle approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub particles: Vec<ChainState>,
    /// Normalized, summing to 1.
    pub weights: Vec<f64>,
    pub alpha: f64,
    /// Iteration or level index that produced this ensemble.
    pub level: usize,
}

impl ParticleEnsemble {
    pub fn equally_weighted(particles: Vec<ChainState>, alpha: f64) -> Self {
        let n = particles.len();
        Self {
            particles,
            weights: alloc::vec![1.0 / n as f64; n],
            alpha,
            level: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn log_liks(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.log_lik).collect()
    }

    /// Self-normalized estimate of `E[f(z)]`.
    pub fn expectation(&self, f: impl Fn(&ChainState) -> f64) -> f64 {
        self.particles.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Weighted per-coordinate standard deviation.
pub(crate) fn spread(particles: &[ChainState], weights: &[f64]) -> Vec<f64> {
    let dim = particles.first().map_or(0, |p| p.z.len());
    let mut mean = alloc::vec![0.0; dim];
    for (p, w) in particles.iter().zip(weights) {
        for (m, z) in mean.iter_mut().zip(&p.z) {
            *m += w * z;
        }
    }
    let mut var = alloc::vec![0.0; dim];
    for (p, w) in particles.iter().zip(weights) {
        for ((v, z), m) in var.iter_mut().zip(&p.z).zip(&mean) {
            *v += w * (z - m) * (z - m);
        }
    }
    var.into_iter().map(sqrt).collect()
}

/// Per-particle working set. Slot `p` keeps RNG stream `p` for the whole
/// run, whichever particle it currently carries.
#[derive(Debug, Clone)]
pub(crate) struct Slot {
    pub state: ChainState,
    pub rng: StreamRng,
    pub counts: EvalCounts,
    pub stats: AcceptanceStats,
    pub inner: AcceptanceStats,
    pub scratch: Vec<f64>,
}

impl Slot {
    pub fn new(state: ChainState, rng: StreamRng) -> Self {
        Self {
            state,
            rng,
            counts: EvalCounts::default(),
            stats: AcceptanceStats::default(),
            inner: AcceptanceStats::default(),
            scratch: Vec::new(),
        }
    }

    pub fn reset_stats(&mut self) {
        self.stats = AcceptanceStats::default();
        self.inner = AcceptanceStats::default();
    }
}
