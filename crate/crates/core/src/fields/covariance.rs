use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::CellCenters;
use crate::error::{Error, Result};
use crate::math::{exp, hypot};

/// Isotropic exponential covariance `σ² exp(-d / l)` of a log-field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpCovariance {
    pub sigma: f64,
    pub length_scale: f64,
}

impl ExpCovariance {
    pub fn new(sigma: f64, length_scale: f64) -> Result<Self> {
        if !(sigma > 0.0 && length_scale > 0.0) {
            return Err(Error::invalid("covariance sigma and length scale must be positive"));
        }
        Ok(Self { sigma, length_scale })
    }

    #[inline]
    pub fn at_distance(&self, d: f64) -> f64 {
        self.sigma * self.sigma * exp(-d / self.length_scale)
    }
}

/// Dense covariance between all cell centers. The upper triangle is computed
/// once and mirrored, so the result is exactly symmetric.
pub fn build_exp_covariance<G: CellCenters>(grid: &G, cov: &ExpCovariance) -> DMatrix<f64> {
    let centers = grid.centers();
    let n = centers.len();
    let var = cov.sigma * cov.sigma;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = var;
        let (xi, yi) = centers[i];
        for j in (i + 1)..n {
            let (xj, yj) = centers[j];
            let v = cov.at_distance(hypot(xi - xj, yi - yj));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}
