use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::schedule::{adaptive_threshold, subset_weights, RareEventSpec, ThresholdSchedule};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::math::{exp, ln};
use crate::mcmc::{
    mh_step_tempered, propagate_nested, AcceptanceStats, ChainState, KernelConfig, KernelState, Subset,
};
use crate::problem::{EvalCounts, ForwardProblem};
use crate::rng::RngBank;
use crate::smc::{spread, systematic_resample, ParticleEnsemble, Slot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RareConfig {
    pub schedule: ThresholdSchedule,
    /// Constrained MH steps (or outer steps when nested) per level.
    pub s_r: usize,
    /// Posterior steps inside each outer step; `None` for plain constrained
    /// steps.
    pub ss_r: Option<usize>,
    pub kernel: KernelConfig,
    /// Cap on adaptive levels.
    pub max_levels: usize,
}

impl Default for RareConfig {
    fn default() -> Self {
        Self {
            schedule: ThresholdSchedule::Adaptive { gamma: 0.05 },
            s_r: 20,
            ss_r: None,
            kernel: KernelConfig::walk_adaptive(0.5),
            max_levels: 10_000,
        }
    }
}

impl RareConfig {
    pub fn validate(&self, spec: &RareEventSpec) -> Result<()> {
        self.schedule.validate(spec)?;
        if self.ss_r == Some(0) {
            return Err(Error::invalid("ss_r must be at least 1 when set"));
        }
        if self.max_levels == 0 {
            return Err(Error::invalid("max_levels must be positive"));
        }
        Ok(())
    }
}

/// One subset level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub k: usize,
    pub threshold: f64,
    pub survivors: usize,
    pub p_k: f64,
    /// `Σ_{j ≤ k} ln P_j`.
    pub log_estimate: f64,
    /// Constrained (or outer) acceptance rate during propagation.
    pub acceptance: Option<f64>,
    /// Posterior-step acceptance inside nested propagation.
    pub inner_acceptance: Option<f64>,
    pub step: f64,
    /// Stage counts accumulated up to and including this level.
    pub counts: EvalCounts,
}

#[derive(Debug, Clone)]
pub struct RareOutput {
    pub estimate: f64,
    pub log_estimate: f64,
    pub levels: Vec<LevelRecord>,
    /// Particles in the target set after the final propagation.
    pub ensemble: ParticleEnsemble,
    pub counts: EvalCounts,
    /// Level and threshold at which no particle survived.
    pub died: Option<(usize, f64)>,
}

impl RareOutput {
    pub fn thresholds(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.threshold).collect()
    }

    /// Product of `P_j` up to the level whose threshold equals `threshold`.
    pub fn partial_estimate(&self, threshold: f64) -> Option<(f64, &LevelRecord)> {
        self.levels
            .iter()
            .find(|l| l.threshold == threshold)
            .map(|l| (exp(l.log_estimate), l))
    }
}

/// Subset-sampling SMC starting from an equally weighted ensemble.
pub fn run_smc_rare<P, E>(
    problem: &P,
    initial: &ParticleEnsemble,
    spec: &RareEventSpec,
    config: &RareConfig,
    seed: u64,
    exec: &E,
) -> Result<RareOutput>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    let mut bank = RngBank::new(seed, initial.len());
    run_smc_rare_with(problem, initial.particles.clone(), spec, config, &mut bank, exec)
}

/// As [`run_smc_rare`], continuing an existing bank of streams.
pub fn run_smc_rare_with<P, E>(
    problem: &P,
    particles: Vec<ChainState>,
    spec: &RareEventSpec,
    config: &RareConfig,
    bank: &mut RngBank,
    exec: &E,
) -> Result<RareOutput>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    let out = rare_stage(problem, particles, spec, config, bank, exec)?;
    match out.died {
        Some((level, threshold)) => Err(Error::ParticleSystemDied { level, threshold }),
        None => Ok(out),
    }
}

/// The level loop. Particle death is reported through `died` so callers
/// can still read the partial products of the levels that were reached.
pub(crate) fn rare_stage<P, E>(
    problem: &P,
    particles: Vec<ChainState>,
    spec: &RareEventSpec,
    config: &RareConfig,
    bank: &mut RngBank,
    exec: &E,
) -> Result<RareOutput>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    config.validate(spec)?;
    let n = particles.len();
    if n < 2 {
        return Err(Error::invalid("need at least two particles"));
    }
    if bank.slots.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bank.slots.len(),
        });
    }
    let dim = particles[0].z.len();
    let mut slots: Vec<(Slot, Option<Error>)> = particles
        .into_iter()
        .zip(&bank.slots)
        .map(|(p, rng)| (Slot::new(p, rng.clone()), None))
        .collect();
    exec.for_each_mut(&mut slots, |_, (slot, err)| {
        if slot.state.qoi.is_none() {
            slot.counts.r_init += 1;
            match problem.qoi(&slot.state.z, None) {
                Ok(q) => slot.state.qoi = Some(q),
                Err(e) => *err = Some(e),
            }
        }
    });
    let mut work = Vec::with_capacity(n);
    for (slot, err) in slots {
        if let Some(e) = err {
            return Err(e);
        }
        work.push(slot);
    }
    let mut slots = work;

    let mut kernel = KernelState::new(&config.kernel, dim);
    let mut levels = Vec::new();
    let mut log_est = 0.0;
    let mut died = None;
    let uniform = alloc::vec![1.0 / n as f64; n];

    let max_levels = match &config.schedule {
        ThresholdSchedule::Fixed { thresholds } => thresholds.len(),
        ThresholdSchedule::Adaptive { .. } => config.max_levels,
    };
    let mut finished = false;
    for k in 1..=max_levels {
        let qois: Vec<f64> = slots.iter().map(|s| s.state.qoi.expect("cached")).collect();
        let (threshold, last) = match &config.schedule {
            ThresholdSchedule::Fixed { thresholds } => (thresholds[k - 1], k == thresholds.len()),
            ThresholdSchedule::Adaptive { gamma } => adaptive_threshold(&qois, *gamma, spec)?,
        };
        let (weights, survivors) = match subset_weights(&qois, threshold, spec.direction, k) {
            Ok(v) => v,
            Err(_) => {
                died = Some((k, threshold));
                break;
            }
        };
        let p_k = survivors.len() as f64 / n as f64;
        log_est += ln(p_k);

        let idx = systematic_resample(&weights, &mut bank.resample);
        let states: Vec<ChainState> = idx.iter().map(|&i| slots[i].state.clone()).collect();
        for (slot, s) in slots.iter_mut().zip(states) {
            slot.state = s;
        }
        let states: Vec<ChainState> = slots.iter().map(|s| s.state.clone()).collect();
        kernel.set_spread(&spread(&states, &uniform));
        let proposal = kernel.proposal();
        let step = kernel.factor();
        let subset = Subset {
            threshold,
            direction: spec.direction,
        };
        let (s_r, ss_r) = (config.s_r, config.ss_r);
        exec.for_each_mut(&mut slots, |_, slot| {
            slot.reset_stats();
            match ss_r {
                Some(ss) => propagate_nested(
                    problem,
                    &mut slot.state,
                    s_r,
                    ss,
                    &proposal,
                    &subset,
                    &mut slot.rng,
                    &mut slot.counts,
                    &mut slot.inner,
                    &mut slot.stats,
                    &mut slot.scratch,
                ),
                None => {
                    for _ in 0..s_r {
                        let acc = mh_step_tempered(
                            problem,
                            &mut slot.state,
                            &proposal,
                            1.0,
                            Some(&subset),
                            &mut slot.rng,
                            &mut slot.counts,
                            &mut slot.scratch,
                        );
                        slot.stats.record(acc);
                    }
                }
            }
            debug_assert!(subset.contains(slot.state.qoi.expect("cached")));
        });
        let (mut outer, mut inner) = (AcceptanceStats::default(), AcceptanceStats::default());
        for s in &slots {
            outer.merge(&s.stats);
            inner.merge(&s.inner);
        }
        kernel.after_batch(if ss_r.is_some() { &inner } else { &outer });
        kernel.after_level();

        levels.push(LevelRecord {
            k,
            threshold,
            survivors: survivors.len(),
            p_k,
            log_estimate: log_est,
            acceptance: outer.rate(),
            inner_acceptance: inner.rate(),
            step,
            counts: slots.iter().map(|s| s.counts).sum(),
        });
        if last {
            finished = true;
            break;
        }
    }
    if !finished && died.is_none() {
        return Err(Error::LevelLimit { levels: max_levels });
    }

    for (b, s) in bank.slots.iter_mut().zip(&slots) {
        b.clone_from(&s.rng);
    }
    let counts = slots.iter().map(|s| s.counts).sum();
    let final_level = levels.len();
    let mut ensemble =
        ParticleEnsemble::equally_weighted(slots.into_iter().map(|s| s.state).collect(), 1.0);
    ensemble.level = final_level;
    let (estimate, log_estimate) = if died.is_some() {
        (0.0, f64::NEG_INFINITY)
    } else {
        (exp(log_est), log_est)
    };
    Ok(RareOutput {
        estimate,
        log_estimate,
        levels,
        ensemble,
        counts,
        died,
    })
}
