//! Two-stage Sequential Monte Carlo for rare-event probabilities under a
//! posterior distribution.
//!
//! The first stage tempers the likelihood from the prior to the posterior
//! with adaptively chosen exponents; the second stage shrinks nested subsets
//! `{R(θ) ≥ T_k}` (or `≤`) until the target set is reached, and the
//! probability estimate is the product of the per-level survivor fractions.
//!
//! The crate is `no_std` (with `alloc`). All floating point transcendental
//! functions go through [`math`], which is backed by `libm`, so results are
//! identical on every platform for a given seed. Parallel execution is
//! injected through the [`exec::Executor`] trait; [`exec::Sequential`] is the
//! reference implementation.
//!
//! Module map:
//! - [`fields`]: grids, exponential covariances, KL bases and pixel Gaussian
//!   random fields (optionally conditioned on noisy point data).
//! - [`forward`]: 1-D steady diffusion, 2-D steady confined flow, explicit
//!   advection-dispersion transport and the Gaussian log-likelihood.
//! - [`problem`]: the [`problem::ForwardProblem`] trait and the three bundled
//!   test cases.
//! - [`mcmc`]: proposals, tempered / subset-constrained Metropolis-Hastings,
//!   step-size adaptation and R-hat.
//! - [`smc`]: tempered SMC for posterior inference.
//! - [`rare`]: subset-sampling SMC for rare events.
//! - [`postrisk`]: the combined method, baselines and run summaries.

#![no_std]

extern crate alloc;

pub mod error;
pub mod exec;
pub mod fields;
pub mod forward;
pub mod math;
pub mod mcmc;
pub mod postrisk;
pub mod problem;
pub mod rare;
pub mod rng;
pub mod smc;

pub use error::{Error, Result, Stage};
