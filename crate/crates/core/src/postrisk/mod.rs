//! The two-stage method, the Monte Carlo and MCMC baselines, and
//! repeated-run summaries.

mod baselines;
mod bias;
mod report;
mod run;

pub use baselines::{mc_posterior_estimate, mc_prior_estimate, MhConfig};
pub use bias::{adaptive_bias_probe, BiasProbe};
pub use report::{run_repeated, ChainRecord, summarize_runs, EstimateReport, PartialEstimate, RunRecord, Summary};
pub use run::{run_postrisk, PostRiskConfig, PostRiskRun};
