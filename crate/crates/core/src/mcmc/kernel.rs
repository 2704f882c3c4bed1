use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adapt::AcceptanceStats;
use super::proposal::Proposal;
use crate::error::Result;
use crate::math::ln;
use crate::problem::{EvalCounts, ForwardProblem};

/// Side of the threshold that defines the rare set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `R(θ) ≥ T`.
    Geq,
    /// `R(θ) ≤ T`.
    Leq,
}

impl Direction {
    /// Inclusive comparison.
    #[inline]
    pub fn satisfies(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::Geq => value >= threshold,
            Direction::Leq => value <= threshold,
        }
    }

    /// The threshold that admits every value.
    pub fn unbounded(self) -> f64 {
        match self {
            Direction::Geq => f64::NEG_INFINITY,
            Direction::Leq => f64::INFINITY,
        }
    }
}

/// `{θ : R(θ) ≥ T}` or `{θ : R(θ) ≤ T}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subset {
    pub threshold: f64,
    pub direction: Direction,
}

impl Subset {
    #[inline]
    pub fn contains(&self, qoi: f64) -> bool {
        self.direction.satisfies(qoi, self.threshold)
    }
}

/// A latent vector together with cached evaluations at that vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub z: Vec<f64>,
    pub log_lik: f64,
    /// Present only while it is known to belong to `z`.
    pub qoi: Option<f64>,
}

impl ChainState {
    /// Evaluates a fresh state. Counts go to the `*_init` counters.
    pub fn evaluate<P: ForwardProblem + ?Sized>(
        problem: &P,
        z: Vec<f64>,
        with_qoi: bool,
        counts: &mut EvalCounts,
    ) -> Result<Self> {
        let log_lik = if problem.has_data() {
            counts.g_init += 1;
            problem.log_likelihood(&z)?
        } else {
            0.0
        };
        let qoi = if with_qoi {
            counts.r_init += 1;
            Some(problem.qoi(&z, None)?)
        } else {
            None
        };
        Ok(Self { z, log_lik, qoi })
    }
}

/// One Metropolis-Hastings step targeting `π(z) · L(z)^α`, optionally
/// restricted to `subset`.
///
/// The forward operator runs iff the problem has data. With a subset the
/// quantity of interest runs on every candidate, with the threshold as its
/// early-stopping limit. A failed evaluation rejects the candidate and is
/// counted. A rejected step leaves `state` untouched.
#[allow(clippy::too_many_arguments)]
pub fn mh_step_tempered<P: ForwardProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    state: &mut ChainState,
    proposal: &Proposal,
    alpha: f64,
    subset: Option<&Subset>,
    rng: &mut R,
    counts: &mut EvalCounts,
    scratch: &mut Vec<f64>,
) -> bool {
    scratch.resize(state.z.len(), 0.0);
    proposal.propose(&state.z, rng, scratch);
    let u: f64 = rng.random();

    let log_lik = if problem.has_data() {
        counts.g_steps += 1;
        match problem.log_likelihood(scratch) {
            Ok(v) if !v.is_nan() => v,
            _ => {
                counts.failures += 1;
                return false;
            }
        }
    } else {
        0.0
    };

    let mut qoi = None;
    if let Some(s) = subset {
        counts.r_steps += 1;
        match problem.qoi(scratch, Some(s.threshold)) {
            Ok(q) if !q.is_nan() => {
                if !s.contains(q) {
                    return false;
                }
                qoi = Some(q);
            }
            _ => {
                counts.failures += 1;
                return false;
            }
        }
    }

    let tempered = if alpha == 0.0 {
        0.0
    } else {
        alpha * (log_lik - state.log_lik)
    };
    let log_a = tempered + proposal.log_prior_correction(&state.z, scratch);
    let accept = log_a >= 0.0 || (!log_a.is_nan() && ln(u) < log_a);
    if accept {
        core::mem::swap(&mut state.z, scratch);
        state.log_lik = log_lik;
        state.qoi = qoi;
    }
    accept
}

/// `s_r` outer steps; each runs `ss_r` likelihood-only steps at `α = 1`
/// from the current state and accepts the end point iff its quantity of
/// interest lies in `subset`. One quantity evaluation per outer step.
#[allow(clippy::too_many_arguments)]
pub fn propagate_nested<P: ForwardProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    state: &mut ChainState,
    s_r: usize,
    ss_r: usize,
    proposal: &Proposal,
    subset: &Subset,
    rng: &mut R,
    counts: &mut EvalCounts,
    inner: &mut AcceptanceStats,
    outer: &mut AcceptanceStats,
    scratch: &mut Vec<f64>,
) {
    for _ in 0..s_r {
        let mut cand = state.clone();
        for _ in 0..ss_r {
            let acc = mh_step_tempered(problem, &mut cand, proposal, 1.0, None, rng, counts, scratch);
            inner.record(acc);
        }
        counts.r_steps += 1;
        match problem.qoi(&cand.z, Some(subset.threshold)) {
            Ok(q) if !q.is_nan() && subset.contains(q) => {
                cand.qoi = Some(q);
                *state = cand;
                outer.record(true);
            }
            Ok(q) if !q.is_nan() => outer.record(false),
            _ => {
                counts.failures += 1;
                outer.record(false);
            }
        }
    }
}
