use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::math::{abs, exp, ln};

const SEARCH_ITERATIONS: usize = 60;
const SEARCH_WIDTH: f64 = 1e-10;

fn degenerate() -> Error {
    Error::DegenerateEnsemble { iteration: 0 }
}

/// `Δα · ℓ`, with `0 · ℓ = 0` even for `ℓ = −∞`.
pub fn incremental_log_weights(log_liks: &[f64], delta_alpha: f64) -> Vec<f64> {
    log_liks
        .iter()
        .map(|&l| if delta_alpha == 0.0 { 0.0 } else { delta_alpha * l })
        .collect()
}

/// `exp((α_new − α_old) ℓ)` up to a common factor: the largest weight is 1.
pub fn incremental_weights(log_liks: &[f64], alpha_old: f64, alpha_new: f64) -> Vec<f64> {
    let lw = incremental_log_weights(log_liks, alpha_new - alpha_old);
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return alloc::vec![0.0; lw.len()];
    }
    lw.iter().map(|l| exp(l - max)).collect()
}

/// Incremental weights scaled so that `max_p W_p w_p = 1`.
///
/// ESS, CESS and the normalized update are invariant under a common factor
/// on `w`, so this only matters numerically: scaling by the largest
/// increment alone can underflow every particle that still carries weight.
/// Particles with `W_p = 0` get `w_p = 0`.
pub fn incremental_weights_given(prev: &[f64], log_liks: &[f64], alpha_old: f64, alpha_new: f64) -> Result<Vec<f64>> {
    check_len(prev.len(), log_liks.len())?;
    let lw = incremental_log_weights(log_liks, alpha_new - alpha_old);
    let shift = prev
        .iter()
        .zip(&lw)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, l)| ln(*w) + l)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY || shift.is_nan() {
        return Ok(alloc::vec![0.0; lw.len()]);
    }
    // W_p w_p ≤ 1 always; the cap only binds where W_p < e^-700.
    Ok(prev
        .iter()
        .zip(&lw)
        .map(|(w, l)| if *w > 0.0 { exp((l - shift).min(700.0)) } else { 0.0 })
        .collect())
}

/// `W_p w_p / Σ_j W_j w_j`.
pub fn update_normalized_weights(prev: &[f64], inc: &[f64]) -> Result<Vec<f64>> {
    check_len(prev.len(), inc.len())?;
    let total: f64 = prev.iter().zip(inc).map(|(a, b)| a * b).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(degenerate());
    }
    Ok(prev.iter().zip(inc).map(|(a, b)| a * b / total).collect())
}

/// `(Σ W w)² / Σ W² w²`.
pub fn ess(prev: &[f64], inc: &[f64]) -> Result<f64> {
    check_len(prev.len(), inc.len())?;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (a, b) in prev.iter().zip(inc) {
        let v = a * b;
        s1 += v;
        s2 += v * v;
    }
    if !(s2 > 0.0) {
        return Err(degenerate());
    }
    Ok(s1 * s1 / s2)
}

/// `N (Σ W w)² / Σ W w²`.
pub fn cess(prev: &[f64], inc: &[f64]) -> Result<f64> {
    check_len(prev.len(), inc.len())?;
    let (mut s1, mut s2) = (0.0, 0.0);
    for (a, b) in prev.iter().zip(inc) {
        s1 += a * b;
        s2 += a * b * b;
    }
    if !(s2 > 0.0) {
        return Err(degenerate());
    }
    Ok(prev.len() as f64 * s1 * s1 / s2)
}

/// Next exponent in `(α_old, 1]` whose CESS is closest to `target`.
///
/// Returns exactly 1 when `CESS(1) ≥ target`. Otherwise bisects, keeping
/// the lower end at or above the target, for 60 halvings or until the
/// bracket is narrower than 1e-10; ties go to the larger exponent.
pub fn next_alpha_binary_search(
    weights: &[f64],
    log_liks: &[f64],
    alpha_old: f64,
    target: f64,
) -> Result<f64> {
    check_len(weights.len(), log_liks.len())?;
    if !(alpha_old < 1.0) {
        return Err(Error::invalid("exponent already reached 1"));
    }
    let at = |a: f64| cess(weights, &incremental_weights_given(weights, log_liks, alpha_old, a)?);
    if at(1.0)? >= target {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (alpha_old, 1.0);
    let (mut c_lo, mut c_hi) = (weights.len() as f64, at(1.0)?);
    for _ in 0..SEARCH_ITERATIONS {
        if hi - lo < SEARCH_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let c = at(mid)?;
        if c >= target {
            lo = mid;
            c_lo = c;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    if lo == alpha_old || abs(c_hi - target) <= abs(c_lo - target) {
        Ok(hi)
    } else {
        Ok(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_increment_gives_unit_weights() {
        assert_eq!(incremental_weights(&[-3.0, f64::NEG_INFINITY, 2.0], 0.4, 0.4), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn scaling_keeps_weighted_particles_alive() {
        // the largest increment sits on a particle with negligible weight
        let prev = [0.0, 0.5, 0.5];
        let ll = [0.0, -2000.0, -2001.0];
        assert!(cess(&prev, &incremental_weights(&ll, 0.0, 1.0)).is_err());
        let w = incremental_weights_given(&prev, &ll, 0.0, 1.0).unwrap();
        let c = cess(&prev, &w).unwrap();
        let next = update_normalized_weights(&prev, &w).unwrap();
        assert!(abs(next[1] / next[2] - exp(1.0)) < 1e-12);
        assert!(c > 0.0 && c <= 3.0);
    }

    #[test]
    fn doubling_weight() {
        let w = incremental_weights(&[0.0, ln(2.0)], 0.0, 1.0);
        assert!(abs(w[1] / w[0] - 2.0) < 1e-15);
    }

    #[test]
    fn normalization() {
        let w = update_normalized_weights(&[0.25; 4], &[1.0, 2.0, 1.0, 0.0]).unwrap();
        assert_eq!(w, [0.25, 0.5, 0.25, 0.0]);
        assert!(matches!(
            update_normalized_weights(&[0.5, 0.5], &[0.0, 0.0]),
            Err(Error::DegenerateEnsemble { .. })
        ));
    }

    #[test]
    fn ess_and_cess_examples() {
        assert!(abs(ess(&[0.25; 4], &[0.7; 4]).unwrap() - 4.0) < 1e-12);
        assert!(abs(cess(&[0.25; 4], &[0.7; 4]).unwrap() - 4.0) < 1e-12);
        assert!(abs(ess(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 1.0) < 1e-15);
        assert!(abs(cess(&[0.5, 0.5], &[2.0, 0.0]).unwrap() - 1.0) < 1e-15);
    }

    #[test]
    fn flat_likelihood_jumps_to_one() {
        assert_eq!(next_alpha_binary_search(&[0.25; 4], &[-2.0; 4], 0.0, 3.96).unwrap(), 1.0);
    }

    #[test]
    fn matches_dense_scan() {
        let w = [0.5, 0.5];
        let l = [0.0, -10.0];
        let target = 0.9 * 2.0;
        let a = next_alpha_binary_search(&w, &l, 0.0, target).unwrap();
        let grid = 1_000_000;
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=grid {
            let x = i as f64 / grid as f64;
            let d = abs(cess(&w, &incremental_weights(&l, 0.0, x)).unwrap() - target);
            if d < best.0 {
                best = (d, x);
            }
        }
        assert!(abs(a - best.1) < 1e-6, "{a} vs {}", best.1);
        assert!(a > 0.0);
    }
}
