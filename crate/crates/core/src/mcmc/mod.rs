//! Metropolis-Hastings machinery shared by both SMC stages and the MCMC
//! baseline.

mod adapt;
mod kernel;
mod proposal;
mod rhat;

pub use adapt::{adapt_scale, adapt_step_size, AcceptanceStats, KernelConfig, KernelState, StepControl};
pub use kernel::{mh_step_tempered, propagate_nested, ChainState, Direction, Subset};
pub use proposal::{propose_pcn, Proposal, ProposalKind};
pub use rhat::{r_hat, rhat_history, RhatCheckpoint, RhatTracker};
