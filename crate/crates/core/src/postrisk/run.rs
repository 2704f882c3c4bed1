use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::report::{PartialEstimate, RunRecord};
use crate::error::{Error, Result, Stage};
use crate::exec::Executor;
use crate::math::exp;
use crate::mcmc::ChainState;
use crate::problem::{EvalCounts, ForwardProblem};
use crate::rare::{rare_stage, snap_threshold, RareConfig, RareEventSpec, ThresholdSchedule};
use crate::rng::RngBank;
use crate::smc::{run_smc_posterior_with, SmcPosteriorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRiskConfig {
    /// Also fixes the particle count of the rare-event stage.
    pub posterior: SmcPosteriorConfig,
    pub rare: RareConfig,
    pub spec: RareEventSpec,
    /// Less extreme thresholds estimated from the same run. Each is snapped
    /// into a fixed schedule, replacing the nearest entry.
    #[serde(default)]
    pub intermediate: Vec<f64>,
}

impl PostRiskConfig {
    /// Rare-stage configuration with intermediate thresholds snapped in.
    pub fn effective_rare(&self) -> RareConfig {
        let mut rare = self.rare.clone();
        if let ThresholdSchedule::Fixed { thresholds } = &mut rare.schedule {
            for &t in &self.intermediate {
                snap_threshold(thresholds, t);
            }
        }
        rare
    }
}

/// One run of the two-stage method.
#[derive(Debug, Clone)]
pub struct PostRiskRun {
    pub record: RunRecord,
    /// Posterior-stage evaluations.
    pub counts_posterior: EvalCounts,
    pub counts_rare: EvalCounts,
    /// Final particles, all inside the target set unless the system died.
    pub particles: Vec<ChainState>,
}

/// Stage one tempers from the prior to the posterior (skipped without
/// data, where the prior is sampled directly); stage two shrinks the subset
/// at exponent 1 starting from the equally weighted posterior particles.
///
/// Particle death is not an error here: the record carries estimate 0 and
/// the level reached.
pub fn run_postrisk<P, E>(problem: &P, config: &PostRiskConfig, seed: u64, exec: &E) -> Result<PostRiskRun>
where
    P: ForwardProblem + ?Sized,
    E: Executor,
{
    let n = config.posterior.n_particles;
    let mut bank = RngBank::new(seed, n);
    let (particles, alphas, iterations, counts_posterior) = if problem.has_data() {
        let post = run_smc_posterior_with(problem, &config.posterior, &mut bank, exec)
            .map_err(|e| e.in_stage(Stage::Posterior))?;
        (post.ensemble.particles, post.alphas, post.records, post.counts)
    } else {
        if n < 2 {
            return Err(Error::invalid("need at least two particles").in_stage(Stage::Posterior));
        }
        let slots = crate::smc::init_slots(problem, &bank, problem.dim(), exec);
        let counts = slots.iter().map(|s| s.counts).sum();
        for (b, s) in bank.slots.iter_mut().zip(&slots) {
            b.clone_from(&s.rng);
        }
        (slots.into_iter().map(|s| s.state).collect(), Vec::new(), Vec::new(), counts)
    };

    let rare_cfg = config.effective_rare();
    let out = rare_stage(problem, particles, &config.spec, &rare_cfg, &mut bank, exec)
        .map_err(|e| e.in_stage(Stage::Rare))?;

    let mut counts = counts_posterior;
    counts += out.counts;
    let partial = config
        .intermediate
        .iter()
        .map(|&t| {
            let level = out.levels.iter().find(|l| l.threshold == t);
            let mut c = counts_posterior;
            if let Some(l) = level {
                c += l.counts;
            }
            PartialEstimate {
                threshold: t,
                estimate: level.map_or(0.0, |l| exp(l.log_estimate)),
                level: level.map(|l| l.k),
                counts: c,
            }
        })
        .collect();

    Ok(PostRiskRun {
        record: RunRecord {
            seed,
            estimate: out.estimate,
            died_at_level: out.died.map(|d| d.0),
            counts,
            alphas,
            iterations,
            levels: out.levels,
            partial,
            ..RunRecord::default()
        },
        counts_posterior,
        counts_rare: out.counts,
        particles: out.ensemble.particles,
    })
}
