use alloc::vec::Vec;

use super::ForwardProblem;
use crate::error::{check_len, Error, Result};
use crate::math::{normal_sf, sqrt, std_normal_logpdf, ln};

/// Standard-normal prior with `R(z) = z₀` and optionally one noisy
/// observation `y = z₀ + ε`, `ε ~ N(0, sd²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianToy {
    dim: usize,
    data: Option<(f64, f64)>,
}

impl GaussianToy {
    pub fn prior(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Self { dim, data: None })
    }

    pub fn with_observation(dim: usize, y: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) {
            return Err(Error::invalid("noise sd must be positive"));
        }
        Ok(Self {
            data: Some((y, sd)),
            ..Self::prior(dim)?
        })
    }

    /// Mean and standard deviation of `z₀` under the posterior.
    pub fn posterior_moments(&self) -> (f64, f64) {
        match self.data {
            None => (0.0, 1.0),
            Some((y, sd)) => {
                let v = sd * sd / (1.0 + sd * sd);
                (y / (1.0 + sd * sd), sqrt(v))
            }
        }
    }

    /// `P(z₀ ≥ t | y)`.
    pub fn posterior_exceedance(&self, t: f64) -> f64 {
        let (m, s) = self.posterior_moments();
        normal_sf((t - m) / s)
    }
}

impl ForwardProblem for GaussianToy {
    fn dim(&self) -> usize {
        self.dim
    }

    fn has_data(&self) -> bool {
        self.data.is_some()
    }

    fn log_likelihood(&self, z: &[f64]) -> Result<f64> {
        check_len(self.dim, z.len())?;
        Ok(match self.data {
            None => 0.0,
            Some((y, sd)) => std_normal_logpdf((y - z[0]) / sd) - ln(sd),
        })
    }

    fn qoi(&self, z: &[f64], _limit: Option<f64>) -> Result<f64> {
        check_len(self.dim, z.len())?;
        Ok(z[0])
    }

    fn field(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, z.len())?;
        Ok(z.to_vec())
    }
}
