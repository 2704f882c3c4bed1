use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::ensemble::{spread, ParticleEnsemble, Slot};
use super::resample::systematic_resample;
use super::weights::{cess, ess, incremental_weights_given, next_alpha_binary_search, update_normalized_weights};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::mcmc::{mh_step_tempered, AcceptanceStats, ChainState, KernelConfig, KernelState};
use crate::problem::{EvalCounts, ForwardProblem};
use crate::rng::{standard_normal_vec, RngBank};

/// How the exponents `α_k` are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TemperingMode {
    /// Binary search for `CESS = cess_fraction · N`.
    Adaptive { cess_fraction: f64 },
    /// Strictly increasing exponents in `(0, 1]` ending at 1.
    Fixed { alphas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmcPosteriorConfig {
    pub n_particles: usize,
    /// MH steps per iteration.
    pub s_p: usize,
    /// Resample when ESS falls below this fraction of N.
    pub ess_resample_fraction: f64,
    pub tempering: TemperingMode,
    pub kernel: KernelConfig,
    pub max_iterations: usize,
}

impl Default for SmcPosteriorConfig {
    fn default() -> Self {
        Self {
            n_particles: 40,
            s_p: 40,
            ess_resample_fraction: 0.3,
            tempering: TemperingMode::Adaptive { cess_fraction: 0.99 },
            kernel: KernelConfig::walk_adaptive(0.5),
            max_iterations: 100_000,
        }
    }
}

impl SmcPosteriorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::invalid("need at least two particles"));
        }
        if !(self.ess_resample_fraction > 0.0 && self.ess_resample_fraction <= 1.0) {
            return Err(Error::invalid("ess_resample_fraction must lie in (0, 1]"));
        }
        match &self.tempering {
            TemperingMode::Adaptive { cess_fraction } => {
                if !(*cess_fraction > 0.0 && *cess_fraction < 1.0) {
                    return Err(Error::invalid("cess_fraction must lie in (0, 1)"));
                }
            }
            TemperingMode::Fixed { alphas } => {
                let increasing = alphas.windows(2).all(|w| w[0] < w[1]);
                if alphas.is_empty() || !increasing || !(alphas[0] > 0.0) || alphas[alphas.len() - 1] != 1.0 {
                    return Err(Error::invalid(
                        "fixed exponents must increase strictly within (0, 1] and end at 1",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Diagnostics of one tempering iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub alpha: f64,
    pub ess: f64,
    pub cess: f64,
    pub acceptance: Option<f64>,
    pub resampled: bool,
    /// Walk scale factor or pCN ρ used for the propagation.
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct PosteriorOutput {
    /// Equally weighted posterior particles.
    pub ensemble: ParticleEnsemble,
    /// `α_1, …, α_K`; `α_0 = 0` is implicit.
    pub alphas: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub counts: EvalCounts,
    pub kernel: KernelState,
}

/// Tempered SMC from the prior to the posterior.
pub fn run_smc_posterior<P, E>(problem: &P, config: &SmcPosteriorConfig, seed: u64, exec: &E) -> Result<PosteriorOutput>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    let mut bank = RngBank::new(seed, config.n_particles);
    run_smc_posterior_with(problem, config, &mut bank, exec)
}

/// As [`run_smc_posterior`], drawing from an existing bank of streams.
pub fn run_smc_posterior_with<P, E>(
    problem: &P,
    config: &SmcPosteriorConfig,
    bank: &mut RngBank,
    exec: &E,
) -> Result<PosteriorOutput>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    config.validate()?;
    let n = config.n_particles;
    if bank.slots.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bank.slots.len(),
        });
    }
    let dim = problem.dim();
    let mut slots = init_slots(problem, bank, dim, exec);
    let mut weights = alloc::vec![1.0 / n as f64; n];
    let mut alpha = 0.0;
    let mut alphas = Vec::new();
    let mut records = Vec::new();
    let mut kernel = KernelState::new(&config.kernel, dim);

    for k in 1..=config.max_iterations {
        let log_liks: Vec<f64> = slots.iter().map(|s| s.state.log_lik).collect();
        let degenerate = |_| Error::DegenerateEnsemble { iteration: k };
        let next = match &config.tempering {
            TemperingMode::Adaptive { cess_fraction } => {
                next_alpha_binary_search(&weights, &log_liks, alpha, cess_fraction * n as f64)
                    .map_err(degenerate)?
            }
            TemperingMode::Fixed { alphas } => alphas[k - 1],
        };
        let inc = incremental_weights_given(&weights, &log_liks, alpha, next).map_err(degenerate)?;
        let ess_k = ess(&weights, &inc).map_err(degenerate)?;
        let cess_k = cess(&weights, &inc).map_err(degenerate)?;
        weights = update_normalized_weights(&weights, &inc).map_err(degenerate)?;
        alpha = next;
        alphas.push(alpha);

        let resampled = ess_k < config.ess_resample_fraction * n as f64 || alpha == 1.0;
        if resampled {
            let idx = systematic_resample(&weights, &mut bank.resample);
            let states: Vec<ChainState> = idx.iter().map(|&i| slots[i].state.clone()).collect();
            for (slot, s) in slots.iter_mut().zip(states) {
                slot.state = s;
            }
            weights.iter_mut().for_each(|w| *w = 1.0 / n as f64);
        }

        let states: Vec<ChainState> = slots.iter().map(|s| s.state.clone()).collect();
        kernel.set_spread(&spread(&states, &weights));
        let proposal = kernel.proposal();
        let step = kernel.factor();
        let s_p = config.s_p;
        exec.for_each_mut(&mut slots, |_, slot| {
            slot.reset_stats();
            for _ in 0..s_p {
                let acc = mh_step_tempered(
                    problem,
                    &mut slot.state,
                    &proposal,
                    alpha,
                    None,
                    &mut slot.rng,
                    &mut slot.counts,
                    &mut slot.scratch,
                );
                slot.stats.record(acc);
            }
        });
        let mut stats = AcceptanceStats::default();
        slots.iter().for_each(|s| stats.merge(&s.stats));
        kernel.after_batch(&stats);

        records.push(IterationRecord {
            k,
            alpha,
            ess: ess_k,
            cess: cess_k,
            acceptance: stats.rate(),
            resampled,
            step,
        });
        if alpha == 1.0 {
            let counts = slots.iter().map(|s| s.counts).sum();
            for (b, s) in bank.slots.iter_mut().zip(&slots) {
                *b = s.rng.clone();
            }
            let particles = slots.into_iter().map(|s| s.state).collect();
            let mut ensemble = ParticleEnsemble::equally_weighted(particles, 1.0);
            ensemble.level = k;
            return Ok(PosteriorOutput {
                ensemble,
                alphas,
                records,
                counts,
                kernel,
            });
        }
    }
    Err(Error::LevelLimit {
        levels: config.max_iterations,
    })
}

/// Draws one prior particle per slot and evaluates it. A failed forward
/// run gives the particle log-likelihood `−∞`.
pub(crate) fn init_slots<P, E>(problem: &P, bank: &RngBank, dim: usize, exec: &E) -> Vec<Slot>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    let mut slots: Vec<Slot> = bank
        .slots
        .iter()
        .map(|rng| {
            let empty = ChainState {
                z: Vec::new(),
                log_lik: 0.0,
                qoi: None,
            };
            Slot::new(empty, rng.clone())
        })
        .collect();
    exec.for_each_mut(&mut slots, |_, slot| {
        let z = standard_normal_vec(&mut slot.rng, dim);
        match ChainState::evaluate(problem, z.clone(), false, &mut slot.counts) {
            Ok(s) => slot.state = s,
            Err(_) => {
                // zero weight from the first increment on
                slot.counts.failures += 1;
                slot.state = ChainState {
                    z,
                    log_lik: f64::NEG_INFINITY,
                    qoi: None,
                };
            }
        }
    });
    slots
}
