use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::math::sqrt;
use crate::mcmc::RhatCheckpoint;
use crate::problem::EvalCounts;
use crate::rare::LevelRecord;
use crate::rng::derive_seed;
use crate::smc::IterationRecord;

/// Estimate for an intermediate threshold read off a longer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialEstimate {
    pub threshold: f64,
    pub estimate: f64,
    /// Level whose threshold was snapped to `threshold`.
    pub level: Option<usize>,
    /// Evaluations spent up to and including that level.
    pub counts: EvalCounts,
}

/// Estimate of a single Markov chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub estimate: f64,
    pub hits: u64,
    pub samples: u64,
    pub counts: EvalCounts,
    pub acceptance: Option<f64>,
}

/// Result of one repetition of any estimator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub rep: usize,
    pub seed: u64,
    pub estimate: f64,
    /// Set when the particle system died; `estimate` is then 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub died_at_level: Option<usize>,
    pub counts: EvalCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterations: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partial: Vec<PartialEstimate>,
    /// Indicator hits and samples for sampling baselines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hits: Option<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rhat: Vec<RhatCheckpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chains: Vec<ChainRecord>,
}

impl RunRecord {
    pub fn thresholds(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.threshold).collect()
    }
}

/// Mean, coefficient of variation and range over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    /// Sample sd over mean; absent for fewer than two estimates or a zero
    /// mean.
    pub cov: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub zeros: usize,
}

pub fn summarize_runs(estimates: &[f64]) -> Result<Summary> {
    let n = estimates.len();
    if n == 0 {
        return Err(Error::invalid("no estimates to summarize"));
    }
    let mean = estimates.iter().sum::<f64>() / n as f64;
    let sd = (n >= 2).then(|| {
        let ss: f64 = estimates.iter().map(|e| (e - mean) * (e - mean)).sum();
        sqrt(ss / (n as f64 - 1.0))
    });
    let cov = sd.filter(|_| mean > 0.0).map(|s| s / mean);
    Ok(Summary {
        n,
        mean,
        sd,
        cov,
        min: estimates.iter().copied().fold(f64::INFINITY, f64::min),
        max: estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        zeros: estimates.iter().filter(|e| **e == 0.0).count(),
    })
}

/// Per-run records and their summary, plus summaries of intermediate
/// thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: String,
    pub target: f64,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partial_summaries: Vec<(f64, Summary)>,
    pub per_run: Vec<RunRecord>,
}

impl EstimateReport {
    pub fn new(method: impl Into<String>, target: f64, per_run: Vec<RunRecord>) -> Result<Self> {
        let est: Vec<f64> = per_run.iter().map(|r| r.estimate).collect();
        let summary = summarize_runs(&est)?;
        let mut partial_summaries = Vec::new();
        if let Some(first) = per_run.first() {
            for (i, p) in first.partial.iter().enumerate() {
                let vals: Vec<f64> = per_run
                    .iter()
                    .filter_map(|r| r.partial.get(i).map(|q| q.estimate))
                    .collect();
                partial_summaries.push((p.threshold, summarize_runs(&vals)?));
            }
        }
        Ok(Self {
            method: method.into(),
            target,
            summary,
            partial_summaries,
            per_run,
        })
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.per_run.iter().map(|r| r.estimate).collect()
    }
}

/// Runs `reps` independent repetitions with seeds derived from `master`,
/// possibly concurrently. Results are in repetition order.
pub fn run_repeated<E, F>(reps: usize, master: u64, exec: &E, f: F) -> Result<Vec<RunRecord>>
where
    E: Executor,
    F: Fn(usize, u64) -> Result<RunRecord> + Sync + Send,
{
    let mut slots: Vec<Option<Result<RunRecord>>> = (0..reps).map(|_| None).collect();
    exec.for_each_mut(&mut slots, |rep, slot| {
        let seed = derive_seed(master, rep as u64);
        *slot = Some(f(rep, seed).map(|mut r| {
            r.rep = rep;
            r.seed = seed;
            r
        }));
    });
    slots.into_iter().map(|s| s.expect("every slot ran")).collect()
}
