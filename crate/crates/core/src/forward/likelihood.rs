use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::math::{ln, LN_SQRT_2PI};

/// Observed data with independent Gaussian noise per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: Vec<f64>,
    pub noise_sd: Vec<f64>,
}

impl Observation {
    pub fn new(values: Vec<f64>, noise_sd: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("observation is empty"));
        }
        check_len(values.len(), noise_sd.len())?;
        if noise_sd.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::invalid("noise_sd must be positive"));
        }
        Ok(Self { values, noise_sd })
    }

    pub fn with_common_sd(values: Vec<f64>, sd: f64) -> Result<Self> {
        let n = values.len();
        Self::new(values, alloc::vec![sd; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Gaussian log-likelihood with diagonal covariance.
pub fn log_likelihood(obs: &Observation, simulated: &[f64]) -> Result<f64> {
    check_len(obs.values.len(), simulated.len())?;
    let mut acc = 0.0;
    for ((y, g), sd) in obs.values.iter().zip(simulated).zip(&obs.noise_sd) {
        let r = (y - g) / sd;
        acc -= 0.5 * r * r + ln(*sd) + LN_SQRT_2PI;
    }
    if acc.is_nan() {
        return Err(Error::NonFinite);
    }
    Ok(acc)
}
