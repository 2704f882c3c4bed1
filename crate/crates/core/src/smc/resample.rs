use alloc::vec::Vec;
use rand::Rng;

/// Systematic resampling with offset `u ∈ [0, 1)`: the selection points are
/// `(u + j) / N`.
pub fn systematic_resample_with(weights: &[f64], u: f64) -> Vec<usize> {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(n.saturating_sub(1));
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut cum = weights.first().copied().unwrap_or(0.0) / total;
    for j in 0..n {
        let point = (u + j as f64) / n as f64;
        while cum <= point && i < last {
            i += 1;
            cum += weights[i] / total;
        }
        out.push(i);
    }
    out
}

pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let u: f64 = rng.random();
    systematic_resample_with(weights, u)
}
