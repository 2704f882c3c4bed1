use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::report::{ChainRecord, RunRecord};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::mcmc::{
    mh_step_tempered, rhat_history, AcceptanceStats, ChainState, KernelConfig, KernelState, RhatTracker,
};
use crate::problem::{EvalCounts, ForwardProblem};
use crate::rare::RareEventSpec;
use crate::rng::{standard_normal_vec, stream_rng, StreamRng};

/// Prior samples per work item of [`mc_prior_estimate`].
const CHUNK: usize = 256;

/// Plain Monte Carlo under the prior. Sample `i` is drawn from stream `i`,
/// so the estimate does not depend on the executor.
pub fn mc_prior_estimate<P, E>(problem: &P, spec: &RareEventSpec, n_samples: usize, seed: u64, exec: &E) -> Result<RunRecord>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    let dim = problem.dim();
    let mut chunks: Vec<(usize, u64, EvalCounts)> = (0..n_samples)
        .step_by(CHUNK)
        .map(|start| (start, 0, EvalCounts::default()))
        .collect();
    exec.for_each_mut(&mut chunks, |_, (start, hits, counts)| {
        for i in *start..(*start + CHUNK).min(n_samples) {
            let mut rng = stream_rng(seed, i as u64);
            let z = standard_normal_vec(&mut rng, dim);
            counts.r_init += 1;
            match problem.qoi(&z, Some(spec.target)) {
                Ok(q) if spec.contains(q) => *hits += 1,
                Ok(_) => {}
                Err(_) => counts.failures += 1,
            }
        }
    });
    let hits: u64 = chunks.iter().map(|c| c.1).sum();
    let counts = chunks.iter().map(|c| c.2).sum();
    Ok(RunRecord {
        seed,
        estimate: hits as f64 / n_samples as f64,
        counts,
        hits: Some((hits, n_samples as u64)),
        ..RunRecord::default()
    })
}

/// Metropolis-Hastings chains on the posterior with thinned indicator
/// evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MhConfig {
    pub chains: usize,
    /// Post-pilot steps per chain; all of them enter the estimate.
    pub steps_per_chain: u64,
    /// Burn-in steps per chain before the main run, adapting the step size.
    /// They cost forward runs but produce no samples.
    pub pilot_steps: u64,
    /// Pilot steps between step-size updates.
    pub pilot_batch: u64,
    /// The QoI is evaluated every `thinning` steps.
    pub thinning: u64,
    pub kernel: KernelConfig,
    pub rhat_first_checkpoint: u64,
}

impl Default for MhConfig {
    fn default() -> Self {
        Self {
            chains: 10,
            steps_per_chain: 100_000,
            pilot_steps: 20_000,
            pilot_batch: 50,
            thinning: 100,
            kernel: KernelConfig {
                scale_to_particles: false,
                ..KernelConfig::walk_adaptive(0.5)
            },
            rhat_first_checkpoint: 1000,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::invalid("need at least two chains"));
        }
        if self.thinning == 0 || self.steps_per_chain < self.thinning {
            return Err(Error::invalid("chain length must be at least the thinning interval"));
        }
        if self.pilot_steps > 0 && self.pilot_batch == 0 {
            return Err(Error::invalid("pilot_batch must be positive"));
        }
        Ok(())
    }

    /// Forward runs per chain, including the initial state.
    pub fn g_per_chain(&self) -> u64 {
        1 + self.pilot_steps + self.steps_per_chain
    }
}

struct Chain {
    state: ChainState,
    rng: StreamRng,
    kernel: KernelState,
    counts: EvalCounts,
    stats: AcceptanceStats,
    tracker: RhatTracker,
    hits: u64,
    samples: u64,
    error: Option<Error>,
}

/// Posterior Monte Carlo estimate from independent MH chains. Chain `c`
/// starts from a prior draw on stream `c` and tunes its own step during the
/// pilot; R-hat is reported on the latent coordinates of the main run.
pub fn mc_posterior_estimate<P, E>(
    problem: &P,
    spec: &RareEventSpec,
    config: &MhConfig,
    seed: u64,
    exec: &E,
) -> Result<RunRecord>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    config.validate()?;
    let dim = problem.dim();
    let tracker = RhatTracker::new(dim, config.steps_per_chain, config.rhat_first_checkpoint)?;
    let mut chains: Vec<Chain> = (0..config.chains as u64)
        .map(|c| Chain {
            state: ChainState {
                z: Vec::new(),
                log_lik: 0.0,
                qoi: None,
            },
            rng: stream_rng(seed, c),
            kernel: KernelState::new(&config.kernel, dim),
            counts: EvalCounts::default(),
            stats: AcceptanceStats::default(),
            tracker: tracker.clone(),
            hits: 0,
            samples: 0,
            error: None,
        })
        .collect();

    exec.for_each_mut(&mut chains, |_, ch| {
        let z = standard_normal_vec(&mut ch.rng, dim);
        match ChainState::evaluate(problem, z, false, &mut ch.counts) {
            Ok(s) => ch.state = s,
            Err(e) => {
                ch.error = Some(e);
                return;
            }
        }
        let mut scratch = Vec::new();
        let mut batch = AcceptanceStats::default();
        let mut proposal = ch.kernel.proposal();
        for t in 0..config.pilot_steps {
            let acc = mh_step_tempered(problem, &mut ch.state, &proposal, 1.0, None, &mut ch.rng, &mut ch.counts, &mut scratch);
            batch.record(acc);
            if (t + 1) % config.pilot_batch == 0 {
                ch.kernel.after_batch(&batch);
                proposal = ch.kernel.proposal();
                batch = AcceptanceStats::default();
            }
        }
        for t in 0..config.steps_per_chain {
            let acc = mh_step_tempered(problem, &mut ch.state, &proposal, 1.0, None, &mut ch.rng, &mut ch.counts, &mut scratch);
            ch.stats.record(acc);
            ch.tracker.push(t, &ch.state.z);
            if (t + 1) % config.thinning == 0 {
                ch.counts.r_steps += 1;
                ch.samples += 1;
                match problem.qoi(&ch.state.z, Some(spec.target)) {
                    Ok(q) if spec.contains(q) => ch.hits += 1,
                    Ok(_) => {}
                    Err(_) => ch.counts.failures += 1,
                }
            }
        }
    });

    let mut stats = AcceptanceStats::default();
    let mut counts = EvalCounts::default();
    let mut per_chain = Vec::with_capacity(chains.len());
    let (mut hits, mut samples) = (0, 0);
    let mut trackers = Vec::with_capacity(chains.len());
    for ch in chains {
        if let Some(e) = ch.error {
            return Err(e);
        }
        stats.merge(&ch.stats);
        per_chain.push(ChainRecord {
            estimate: ch.hits as f64 / ch.samples as f64,
            hits: ch.hits,
            samples: ch.samples,
            counts: ch.counts,
            acceptance: ch.stats.rate(),
        });
        counts += ch.counts;
        hits += ch.hits;
        samples += ch.samples;
        trackers.push(ch.tracker);
    }
    Ok(RunRecord {
        seed,
        estimate: hits as f64 / samples as f64,
        counts,
        hits: Some((hits, samples)),
        rhat: rhat_history(&trackers)?,
        acceptance: stats.rate(),
        chains: per_chain,
        ..RunRecord::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::math::{normal_sf, sqrt};
    use crate::problem::GaussianToy;
    use crate::rare::Direction;

    #[test]
    fn prior_mc_on_gaussian_tail() {
        let toy = GaussianToy::prior(2).unwrap();
        let spec = RareEventSpec {
            direction: Direction::Geq,
            target: 1.0,
        };
        let r = mc_prior_estimate(&toy, &spec, 20_000, 3, &Sequential).unwrap();
        let p = normal_sf(1.0);
        let se = sqrt(p * (1.0 - p) / 20_000.0);
        assert!(crate::math::abs(r.estimate - p) < 3.0 * se, "{} vs {p}", r.estimate);
        assert_eq!(r.counts.r_init, 20_000);
        assert_eq!(r.counts.g_total(), 0);
    }

    #[test]
    fn impossible_event_is_zero() {
        let toy = GaussianToy::prior(1).unwrap();
        let spec = RareEventSpec {
            direction: Direction::Geq,
            target: 1e6,
        };
        assert_eq!(mc_prior_estimate(&toy, &spec, 1000, 1, &Sequential).unwrap().estimate, 0.0);
    }

    #[test]
    fn posterior_mh_counts_and_rhat() {
        let toy = GaussianToy::with_observation(1, 1.0, 0.5).unwrap();
        let spec = RareEventSpec {
            direction: Direction::Geq,
            target: 1.0,
        };
        let cfg = MhConfig {
            chains: 4,
            steps_per_chain: 20_000,
            pilot_steps: 500,
            thinning: 10,
            rhat_first_checkpoint: 100,
            ..MhConfig::default()
        };
        let r = mc_posterior_estimate(&toy, &spec, &cfg, 9, &Sequential).unwrap();
        assert_eq!(r.counts.g_total(), 4 * cfg.g_per_chain());
        assert_eq!(r.counts.r_total(), 4 * 2000);
        assert_eq!(r.rhat.last().unwrap().iteration, 20_000);
        assert!(r.rhat.last().unwrap().max() < 1.05);
        let p = toy.posterior_exceedance(1.0);
        assert!(crate::math::abs(r.estimate - p) < 0.05, "{} vs {p}", r.estimate);
        assert_eq!(r.chains.len(), 4);
        let pooled: u64 = r.chains.iter().map(|c| c.hits).sum();
        assert_eq!(Some((pooled, 8000)), r.hits);
        assert!(r.chains.iter().all(|c| c.counts.g_total() == cfg.g_per_chain()));
    }
}
