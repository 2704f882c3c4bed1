use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::math::{abs, sqrt};

/// Truncated Karhunen-Loève basis of a discretized Gaussian process.
///
/// Eigenpairs are those of the covariance matrix evaluated at cell centers,
/// so eigenvectors are orthonormal in the plain Euclidean inner product and
/// `log θ = mean + Σ_i √w_i v_i z_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlBasis {
    mean_log: f64,
    eigenvalues: Vec<f64>,
    /// `n_terms` eigenvectors, each of length `n_cells`.
    eigenvectors: Vec<Vec<f64>>,
    /// `√w_i v_i`, cached for field synthesis.
    modes: Vec<Vec<f64>>,
}

/// Leading `n_terms` eigenpairs of a symmetric positive semidefinite matrix.
///
/// Eigenvalues are sorted nonincreasing and clamped at zero; each
/// eigenvector's largest-magnitude entry is made positive.
pub fn kl_decompose(covariance: &DMatrix<f64>, n_terms: usize, mean_log: f64) -> Result<KlBasis> {
    let n = covariance.nrows();
    if covariance.ncols() != n {
        return Err(Error::invalid("covariance must be square"));
    }
    if n_terms == 0 || n_terms > n {
        return Err(Error::invalid(format!(
            "n_terms must be in 1..={n}, got {n_terms}"
        )));
    }
    if covariance.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("covariance contains non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(covariance.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("QR iteration did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut eigenvalues = Vec::with_capacity(n_terms);
    let mut eigenvectors = Vec::with_capacity(n_terms);
    for &k in order.iter().take(n_terms) {
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        orient(&mut v);
        eigenvectors.push(v);
    }
    Ok(KlBasis::from_parts(mean_log, eigenvalues, eigenvectors))
}

/// Flip the sign so the largest-magnitude component is positive (first one
/// wins ties).
pub(crate) fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if abs(*x) > abs(v[best]) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

impl KlBasis {
    fn from_parts(mean_log: f64, eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Self {
        let modes = eigenvalues
            .iter()
            .zip(&eigenvectors)
            .map(|(w, v)| {
                let s = sqrt(*w);
                v.iter().map(|x| s * x).collect()
            })
            .collect();
        Self {
            mean_log,
            eigenvalues,
            eigenvectors,
            modes,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_cells(&self) -> usize {
        self.eigenvectors.first().map_or(0, Vec::len)
    }

    pub fn mean_log(&self) -> f64 {
        self.mean_log
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    /// `log θ(x) = μ + Σ √w_i v_i(x) z_i` at every cell.
    pub fn log_field(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; self.n_cells()];
        self.log_field_into(z, &mut out)?;
        Ok(out)
    }

    pub fn log_field_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n_terms(), z.len())?;
        check_len(self.n_cells(), out.len())?;
        out.iter_mut().for_each(|v| *v = self.mean_log);
        for (mode, zi) in self.modes.iter().zip(z) {
            for (o, m) in out.iter_mut().zip(mode) {
                *o += m * zi;
            }
        }
        Ok(())
    }

    /// Covariance of the truncated expansion, `Σ w_i v_i v_iᵀ`.
    pub fn truncated_covariance(&self) -> DMatrix<f64> {
        let n = self.n_cells();
        DMatrix::from_fn(n, n, |i, j| self.modes.iter().map(|m| m[i] * m[j]).sum())
    }
}
