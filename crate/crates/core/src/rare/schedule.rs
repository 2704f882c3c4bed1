use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{abs, floor, ln, round};
use crate::mcmc::Direction;

/// The rare set `{R ≥ target}` or `{R ≤ target}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RareEventSpec {
    pub direction: Direction,
    pub target: f64,
}

impl RareEventSpec {
    pub fn contains(&self, qoi: f64) -> bool {
        self.direction.satisfies(qoi, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ThresholdSchedule {
    /// Empirical γ-quantile of the current particles.
    Adaptive { gamma: f64 },
    /// Thresholds moving monotonically toward the target, ending at it.
    Fixed { thresholds: Vec<f64> },
}

impl ThresholdSchedule {
    pub fn validate(&self, spec: &RareEventSpec) -> Result<()> {
        match self {
            ThresholdSchedule::Adaptive { gamma } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::invalid("gamma must lie in (0, 1)"));
                }
            }
            ThresholdSchedule::Fixed { thresholds } => {
                let Some(&last) = thresholds.last() else {
                    return Err(Error::invalid("fixed schedule is empty"));
                };
                if last != spec.target {
                    return Err(Error::invalid("fixed schedule must end at the target"));
                }
                let monotone = thresholds.windows(2).all(|w| match spec.direction {
                    Direction::Geq => w[0] <= w[1],
                    Direction::Leq => w[0] >= w[1],
                });
                if !monotone {
                    return Err(Error::invalid("fixed schedule must move toward the target"));
                }
            }
        }
        Ok(())
    }
}

/// `f(k) = a ln k + T_first`, `a = (T − T_first) / ln K`, for `k = 1..=K`.
/// The last entry is exactly `T`.
pub fn fixed_log_schedule(t_first: f64, t_target: f64, k_r: usize) -> Result<Vec<f64>> {
    if k_r < 2 {
        return Err(Error::invalid("need at least two levels"));
    }
    if t_first == t_target || !t_first.is_finite() || !t_target.is_finite() {
        return Err(Error::invalid("first and target thresholds must be finite and differ"));
    }
    let a = (t_target - t_first) / ln(k_r as f64);
    let mut out: Vec<f64> = (1..=k_r).map(|k| a * ln(k as f64) + t_first).collect();
    out[k_r - 1] = t_target;
    Ok(out)
}

/// `k_log` logarithmic levels from `t_first` to `t_pivot`, then constant
/// steps of `step` from the pivot to `t_target`. The step count is rounded
/// so the last entry is exactly the target.
pub fn log_then_linear_schedule(t_first: f64, t_pivot: f64, k_log: usize, step: f64, t_target: f64) -> Result<Vec<f64>> {
    let mut out = fixed_log_schedule(t_first, t_pivot, k_log)?;
    if !(step > 0.0) || (t_pivot - t_first) * (t_target - t_pivot) <= 0.0 {
        return Err(Error::invalid("pivot must lie strictly between first and target, step > 0"));
    }
    let span = abs(t_target - t_pivot);
    let n = round(span / step) as usize;
    if n == 0 || abs(n as f64 * step - span) > 1e-9 * span {
        return Err(Error::invalid("step must divide the distance from pivot to target"));
    }
    let sign = if t_target > t_pivot { 1.0 } else { -1.0 };
    out.extend((1..n).map(|j| t_pivot + sign * step * j as f64));
    out.push(t_target);
    Ok(out)
}

/// Replaces the entry closest to `value` by `value` and returns its index.
/// The target (last entry) is never replaced.
pub fn snap_threshold(schedule: &mut [f64], value: f64) -> Option<usize> {
    let n = schedule.len().checked_sub(1)?;
    let (idx, _) = schedule[..n]
        .iter()
        .enumerate()
        .map(|(i, t)| (i, abs(t - value)))
        .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    if idx == usize::MAX {
        return None;
    }
    schedule[idx] = value;
    Some(idx)
}

/// The `γ`-quantile of the particle values: the order statistic at 0-based
/// index `⌊γN⌋`, ascending for `Geq` and descending for `Leq`, so at least
/// `(1 − γ)N` distinct values meet it. If it passes
/// the target, the target is returned together with `true`.
pub fn adaptive_threshold(qois: &[f64], gamma: f64, spec: &RareEventSpec) -> Result<(f64, bool)> {
    let n = qois.len();
    if n == 0 {
        return Err(Error::invalid("no particles"));
    }
    if qois.iter().any(|q| q.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = qois.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    if spec.direction == Direction::Leq {
        sorted.reverse();
    }
    let idx = (floor(gamma * n as f64 + 1e-9) as usize).min(n - 1);
    let t = sorted[idx];
    if spec.direction.satisfies(t, spec.target) {
        Ok((spec.target, true))
    } else {
        Ok((t, false))
    }
}

/// Weights `1/|I|` on the survivors `I = {p : R_p meets the threshold}`.
pub fn subset_weights(
    qois: &[f64],
    threshold: f64,
    direction: Direction,
    level: usize,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let survivors: Vec<usize> = qois
        .iter()
        .enumerate()
        .filter(|(_, q)| direction.satisfies(**q, threshold))
        .map(|(i, _)| i)
        .collect();
    if survivors.is_empty() {
        return Err(Error::ParticleSystemDied { level, threshold });
    }
    let w = 1.0 / survivors.len() as f64;
    let mut weights = alloc::vec![0.0; qois.len()];
    for &i in &survivors {
        weights[i] = w;
    }
    Ok((weights, survivors))
}
