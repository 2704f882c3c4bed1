use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Potential scale reduction factor on the second half of each chain.
/// Returns `+∞` when the within-chain variance is zero.
pub fn r_hat(chains: &[&[f64]]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::invalid("r_hat needs at least two chains"));
    }
    let len = chains[0].len();
    if len < 4 || chains.iter().any(|c| c.len() != len) {
        return Err(Error::invalid("r_hat needs equal chain lengths of at least 4"));
    }
    let start = len / 2;
    let moments: Vec<Welford> = chains
        .iter()
        .map(|c| {
            let mut w = Welford::default();
            c[start..].iter().for_each(|&x| w.push(x));
            w
        })
        .collect();
    Ok(from_moments(&moments))
}

#[derive(Debug, Default, Clone, Copy, PartialEq)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.n as f64 - 1.0)
    }
}

fn from_moments(chains: &[Welford]) -> f64 {
    let m = chains.len() as f64;
    let n = chains[0].n as f64;
    let w = chains.iter().map(Welford::variance).sum::<f64>() / m;
    if !(w > 0.0) {
        return f64::INFINITY;
    }
    let grand = chains.iter().map(|c| c.mean).sum::<f64>() / m;
    let b_over_n = chains.iter().map(|c| (c.mean - grand) * (c.mean - grand)).sum::<f64>() / (m - 1.0);
    let var_plus = (n - 1.0) / n * w + b_over_n;
    sqrt(var_plus / w)
}

/// Second-half moments of one chain at a doubling sequence of checkpoints.
///
/// Checkpoint `t` keeps the window `[t/2, t)`, so combining trackers of
/// several chains with [`rhat_history`] gives the exact second-half R-hat at
/// each checkpoint without storing traces. The chain length is always the
/// last checkpoint.
#[derive(Debug, Clone)]
pub struct RhatTracker {
    n_params: usize,
    checkpoints: Vec<u64>,
    windows: Vec<Welford>,
}

/// R-hat per parameter after `iteration` steps of every chain.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RhatCheckpoint {
    pub iteration: u64,
    pub values: Vec<f64>,
}

impl RhatCheckpoint {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl RhatTracker {
    /// Checkpoints `first, 2·first, 4·first, …` below `length`, then `length`.
    pub fn new(n_params: usize, length: u64, first_checkpoint: u64) -> Result<Self> {
        if n_params == 0 || first_checkpoint < 4 || length < 4 {
            return Err(Error::invalid("need ≥ 1 parameter and checkpoints ≥ 4"));
        }
        let mut checkpoints = Vec::new();
        let mut t = first_checkpoint;
        while t < length {
            checkpoints.push(t);
            t *= 2;
        }
        checkpoints.push(length);
        Ok(Self {
            n_params,
            windows: alloc::vec![Welford::default(); checkpoints.len() * n_params],
            checkpoints,
        })
    }

    /// Records the state after step `iteration` (0-based).
    pub fn push(&mut self, iteration: u64, params: &[f64]) {
        for (c, &t) in self.checkpoints.iter().enumerate() {
            if iteration >= t / 2 && iteration < t {
                let row = &mut self.windows[c * self.n_params..(c + 1) * self.n_params];
                for (w, &x) in row.iter_mut().zip(params) {
                    w.push(x);
                }
            }
        }
    }
}

/// Combines equally configured trackers, one per chain.
pub fn rhat_history(chains: &[RhatTracker]) -> Result<Vec<RhatCheckpoint>> {
    if chains.len() < 2 {
        return Err(Error::invalid("r_hat needs at least two chains"));
    }
    let first = &chains[0];
    if chains.iter().any(|c| c.checkpoints != first.checkpoints || c.n_params != first.n_params) {
        return Err(Error::invalid("trackers differ in layout"));
    }
    let np = first.n_params;
    Ok(first
        .checkpoints
        .iter()
        .enumerate()
        .map(|(c, &t)| RhatCheckpoint {
            iteration: t,
            values: (0..np)
                .map(|p| {
                    let col: Vec<Welford> = chains.iter().map(|ch| ch.windows[c * np + p]).collect();
                    from_moments(&col)
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;
    use crate::rng::{standard_normal_vec, stream_rng};

    #[test]
    fn identical_chains() {
        let c: Vec<f64> = (0..20).map(|i| (i % 5) as f64).collect();
        let r = r_hat(&[&c, &c, &c]).unwrap();
        assert!(r <= 1.0 + 1e-12);
    }

    #[test]
    fn constant_chains_are_infinite() {
        let a = [1.0; 10];
        let b = [2.0; 10];
        assert_eq!(r_hat(&[&a, &b]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn iid_normals_converge() {
        let chains: Vec<Vec<f64>> = (0..3)
            .map(|s| standard_normal_vec(&mut stream_rng(9, s), 10_000))
            .collect();
        let refs: Vec<&[f64]> = chains.iter().map(|c| c.as_slice()).collect();
        assert!(r_hat(&refs).unwrap() < 1.01);
    }

    #[test]
    fn shifted_chains_diverge() {
        let a = standard_normal_vec(&mut stream_rng(1, 0), 1000);
        let b: Vec<f64> = standard_normal_vec(&mut stream_rng(1, 1), 1000).iter().map(|x| x + 3.0).collect();
        assert!(r_hat(&[&a, &b]).unwrap() > 1.2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(r_hat(&[&[1.0, 2.0, 3.0, 4.0]]).is_err());
        assert!(r_hat(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]).is_err());
        assert!(r_hat(&[&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]]).is_err());
    }

    #[test]
    fn streaming_matches_batch() {
        let chains: Vec<Vec<f64>> = (0..3)
            .map(|s| standard_normal_vec(&mut stream_rng(4, s), 50))
            .collect();
        let trackers: Vec<RhatTracker> = chains
            .iter()
            .map(|c| {
                let mut t = RhatTracker::new(1, 50, 8).unwrap();
                for (i, x) in c.iter().enumerate() {
                    t.push(i as u64, &[*x]);
                }
                t
            })
            .collect();
        let hist = rhat_history(&trackers).unwrap();
        assert_eq!(hist.iter().map(|h| h.iteration).collect::<Vec<_>>(), [8, 16, 32, 50]);
        for h in hist {
            let refs: Vec<&[f64]> = chains.iter().map(|c| &c[..h.iteration as usize]).collect();
            assert!(abs(h.values[0] - r_hat(&refs).unwrap()) < 1e-12);
        }
    }
}
