//! Runs the configured method and collects everything that is written out.

use std::sync::Mutex;

use postrisk_core::exec::Executor;
use postrisk_core::postrisk::{
    adaptive_bias_probe, mc_posterior_estimate, mc_prior_estimate, run_postrisk, run_repeated, EstimateReport,
    RunRecord,
};
use postrisk_core::problem::SyntheticTruth;
use postrisk_core::mcmc::ChainState;
use postrisk_core::smc::run_smc_posterior;
use serde::{Deserialize, Serialize};

use crate::cases::{self, Case};
use crate::config::{ExperimentConfig, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthInfo {
    pub seed: u64,
    pub qoi: f64,
    pub qoi_censored: bool,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthInfo>,
    #[serde(flatten)]
    pub estimates: EstimateReport,
    /// Frozen-schedule re-runs of a bias probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerun: Option<EstimateReport>,
}

/// Fields of the final particles of the first repetition, in `particles.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleDump {
    /// `"posterior"` or `"rare"`.
    pub stage: String,
    pub nx: usize,
    pub ny: usize,
    pub fields: Vec<Vec<f64>>,
    pub qois: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_field: Option<Vec<f64>>,
}

pub struct Outcome {
    pub report: Report,
    pub particles: Option<ParticleDump>,
    pub truth: Option<SyntheticTruth>,
}

pub fn run_experiment<E: Executor>(cfg: &ExperimentConfig, exec: &E) -> anyhow::Result<Outcome> {
    cfg.validate()?;
    let (case, truth) = cases::build(cfg)?;
    let problem = case.problem();
    let spec = cfg.target.spec();
    let first: Mutex<Option<(&'static str, Vec<ChainState>)>> = Mutex::new(None);
    let keep = |rep: usize, stage: &'static str, particles: Vec<ChainState>| {
        if rep == 0 {
            *first.lock().expect("not poisoned") = Some((stage, particles));
        }
    };

    let mut rerun = None;
    let (name, runs) = match cfg.method {
        Method::Postrisk | Method::SmcRare => {
            let pr = cfg.postrisk_config()?;
            let runs = run_repeated(cfg.reps, cfg.seed, exec, |rep, seed| {
                let run = run_postrisk(problem, &pr, seed, exec)?;
                keep(rep, "rare", run.particles);
                Ok(run.record)
            })?;
            (cfg.method.name().to_string(), runs)
        }
        Method::SmcPosterior => {
            let runs = run_repeated(cfg.reps, cfg.seed, exec, |rep, seed| {
                let out = run_smc_posterior(problem, &cfg.posterior, seed, exec)?;
                let mut counts = out.counts;
                let mut particles = out.ensemble.particles;
                let mut hits = 0;
                for p in &mut particles {
                    counts.r_init += 1;
                    let q = problem.qoi(&p.z, None)?;
                    p.qoi = Some(q);
                    hits += u64::from(spec.contains(q));
                }
                let n = particles.len() as u64;
                keep(rep, "posterior", particles);
                Ok(RunRecord {
                    estimate: hits as f64 / n as f64,
                    counts,
                    alphas: out.alphas,
                    iterations: out.records,
                    hits: Some((hits, n)),
                    ..RunRecord::default()
                })
            })?;
            ("smc-posterior".to_string(), runs)
        }
        Method::Mh => {
            let runs = run_repeated(cfg.reps, cfg.seed, exec, |_, seed| {
                mc_posterior_estimate(problem, &spec, &cfg.mh.config, seed, exec)
            })?;
            if cfg.mh.split_chains {
                ("mh-chain".to_string(), split_chains(runs))
            } else {
                ("mh".to_string(), runs)
            }
        }
        Method::McPrior => {
            let runs = run_repeated(cfg.reps, cfg.seed, exec, |_, seed| {
                mc_prior_estimate(problem, &spec, cfg.mc_prior.samples, seed, exec)
            })?;
            ("mc-prior".to_string(), runs)
        }
        Method::BiasProbe => {
            let probe = adaptive_bias_probe(problem, &cfg.postrisk_config()?, cfg.reps, cfg.seed, exec)?;
            rerun = Some(EstimateReport::new("postrisk-rerun", spec.target, probe.rerun)?);
            ("postrisk-adaptive".to_string(), probe.adaptive)
        }
    };

    let estimates = EstimateReport::new(name, spec.target, runs)?;
    let particles = first
        .into_inner()
        .expect("not poisoned")
        .map(|(stage, ps)| dump(&case, stage, &ps, truth.as_ref()))
        .transpose()?;
    Ok(Outcome {
        report: Report {
            config: cfg.clone(),
            truth: truth.as_ref().map(|t| TruthInfo {
                seed: t.seed,
                qoi: t.qoi,
                qoi_censored: t.qoi_censored,
            }),
            estimates,
            rerun,
        },
        particles,
        truth,
    })
}

/// One record per chain, numbered across repetitions; R-hat stays with the
/// first chain of its run.
fn split_chains(runs: Vec<RunRecord>) -> Vec<RunRecord> {
    let mut out = Vec::new();
    for run in runs {
        for (c, ch) in run.chains.iter().enumerate() {
            out.push(RunRecord {
                rep: out.len(),
                seed: run.seed,
                estimate: ch.estimate,
                counts: ch.counts,
                hits: Some((ch.hits, ch.samples)),
                acceptance: ch.acceptance,
                rhat: if c == 0 { run.rhat.clone() } else { Vec::new() },
                ..RunRecord::default()
            });
        }
    }
    out
}

fn dump(case: &Case, stage: &str, particles: &[ChainState], truth: Option<&SyntheticTruth>) -> anyhow::Result<ParticleDump> {
    let (nx, ny) = case.field_shape();
    let problem = case.problem();
    let fields = particles.iter().map(|p| problem.field(&p.z)).collect::<Result<Vec<_>, _>>()?;
    Ok(ParticleDump {
        stage: stage.to_string(),
        nx,
        ny,
        fields,
        qois: particles.iter().map(|p| p.qoi).collect(),
        truth_field: truth.map(|t| t.field.clone()),
    })
}
