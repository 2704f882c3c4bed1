//! Test cases bundling a latent prior, forward operator, likelihood and
//! quantity of interest.
//!
//! Every case works in a standard-normal latent space: a parameter vector
//! `z` is mapped to a physical field by the case itself, so proposals and
//! the prior density never depend on the case.

mod flow1d;
mod toy;
mod transport2d;

use alloc::vec::Vec;
use core::ops::{Add, AddAssign};
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use flow1d::{Flow1d, Flow1dSetup};
pub use toy::GaussianToy;
pub use transport2d::{well_layout, Transport2d, Transport2dSetup};

/// A Bayesian inverse problem with a scalar hazard quantity.
pub trait ForwardProblem: Sync {
    /// Length of the latent vector.
    fn dim(&self) -> usize;

    /// Whether a likelihood is attached. Without data every candidate has
    /// log-likelihood 0 and the forward operator is never run.
    fn has_data(&self) -> bool;

    /// Runs the forward operator and returns the Gaussian log-likelihood.
    fn log_likelihood(&self, z: &[f64]) -> Result<f64>;

    /// Evaluates the quantity of interest. With `limit` set, the caller only
    /// needs to know on which side of `limit` the value lies, and an
    /// implementation may stop early and return any value beyond it.
    fn qoi(&self, z: &[f64], limit: Option<f64>) -> Result<f64>;

    /// Physical field for plotting; the latent vector by default.
    fn field(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(z.to_vec())
    }
}

impl<P: ForwardProblem + ?Sized> ForwardProblem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn has_data(&self) -> bool {
        (**self).has_data()
    }
    fn log_likelihood(&self, z: &[f64]) -> Result<f64> {
        (**self).log_likelihood(z)
    }
    fn qoi(&self, z: &[f64], limit: Option<f64>) -> Result<f64> {
        (**self).qoi(z, limit)
    }
    fn field(&self, z: &[f64]) -> Result<Vec<f64>> {
        (**self).field(z)
    }
}

/// Forward-operator (`g_*`) and quantity-of-interest (`r_*`) evaluations.
/// `*_init` covers the evaluation of freshly drawn or initial particles,
/// `*_steps` the evaluations inside Metropolis-Hastings moves.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub g_init: u64,
    pub g_steps: u64,
    pub r_init: u64,
    pub r_steps: u64,
    pub failures: u64,
}

impl EvalCounts {
    pub fn g_total(&self) -> u64 {
        self.g_init + self.g_steps
    }

    pub fn r_total(&self) -> u64 {
        self.r_init + self.r_steps
    }
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, o: Self) {
        self.g_init += o.g_init;
        self.g_steps += o.g_steps;
        self.r_init += o.r_init;
        self.r_steps += o.r_steps;
        self.failures += o.failures;
    }
}

impl Add for EvalCounts {
    type Output = Self;

    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl core::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = Self::default();
        for c in iter {
            acc += c;
        }
        acc
    }
}

/// A synthetic data set: the true latent vector, its noiseless and noisy
/// observations and the true quantity of interest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub seed: u64,
    pub z: Vec<f64>,
    pub field: Vec<f64>,
    pub noiseless: Vec<f64>,
    pub observed: Vec<f64>,
    pub noise_sd: Vec<f64>,
    pub qoi: f64,
    pub qoi_censored: bool,
}
