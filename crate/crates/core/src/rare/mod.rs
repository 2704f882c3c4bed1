//! Subset-sampling SMC for `P(R(θ) ≥ T)` or `P(R(θ) ≤ T)`.

mod run;
mod schedule;

pub use crate::mcmc::Direction;
pub(crate) use run::rare_stage;
pub use run::{run_smc_rare, run_smc_rare_with, LevelRecord, RareConfig, RareOutput};
pub use schedule::{
    adaptive_threshold, fixed_log_schedule, log_then_linear_schedule, snap_threshold, subset_weights, RareEventSpec,
    ThresholdSchedule,
};
