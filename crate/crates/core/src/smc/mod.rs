//! Tempered SMC: weights, resampling and the posterior stage.

mod ensemble;
mod posterior;
mod resample;
mod weights;

pub use ensemble::ParticleEnsemble;
pub(crate) use ensemble::{spread, Slot};
pub(crate) use posterior::init_slots;
pub use posterior::{
    run_smc_posterior, run_smc_posterior_with, IterationRecord, PosteriorOutput, SmcPosteriorConfig,
    TemperingMode,
};
pub use resample::{systematic_resample, systematic_resample_with};
pub use weights::{
    cess, ess, incremental_log_weights, incremental_weights, incremental_weights_given, next_alpha_binary_search,
    update_normalized_weights,
};
