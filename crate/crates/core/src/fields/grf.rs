use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::covariance::{build_exp_covariance, ExpCovariance};
use super::grid::CellCenters;
use crate::error::{check_len, Error, Result};
use crate::math::sqrt;

const ROOT_JITTER: f64 = 1e-10;

/// Noisy point measurements of the log-field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointObservations {
    pub locations: Vec<usize>,
    pub values: Vec<f64>,
    pub noise_sd: f64,
}

/// Pixel-based Gaussian random field `X = μ + Σ^{1/2} z`.
///
/// The square root is the symmetric one, `V diag(√max(λ, 0)) Vᵀ`.
#[derive(Debug, Clone)]
pub struct PixelGrf {
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
    /// Symmetric, so its row-major and column-major layouts coincide.
    root: Vec<f64>,
}

impl PixelGrf {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: covariance.nrows(),
            });
        }
        let root = symmetric_root(&covariance)?;
        Ok(Self {
            mean,
            covariance,
            root,
        })
    }

    /// Stationary field with constant mean and exponential covariance.
    pub fn stationary<G: CellCenters>(grid: &G, cov: &ExpCovariance, mean_log: f64) -> Result<Self> {
        let c = build_exp_covariance(grid, cov);
        Self::new(alloc::vec![mean_log; grid.n_cells()], c)
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn variances(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.covariance[(i, i)]).collect()
    }

    /// The square root as a dense matrix.
    pub fn covariance_root(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.len(), &self.root)
    }

    pub fn sample(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; self.len()];
        self.sample_into(z, &mut out)?;
        Ok(out)
    }

    pub fn sample_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.len();
        check_len(n, z.len())?;
        check_len(n, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.root[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (r, zj) in row.iter().zip(z) {
                acc += r * zj;
            }
            *o = self.mean[i] + acc;
        }
        Ok(())
    }

    /// Gaussian conditioning on noisy point values: the noise variance is
    /// added to the observed block before solving.
    pub fn condition(&self, obs: &PointObservations) -> Result<PixelGrf> {
        let n = self.len();
        let k = obs.locations.len();
        check_len(k, obs.values.len())?;
        if !(obs.noise_sd > 0.0) {
            return Err(Error::invalid("noise_sd must be positive"));
        }
        if let Some(&bad) = obs.locations.iter().find(|&&l| l >= n) {
            return Err(Error::invalid(alloc::format!(
                "observation location {bad} outside field of {n} cells"
            )));
        }
        let noise_var = obs.noise_sd * obs.noise_sd;
        let block = DMatrix::from_fn(k, k, |a, b| {
            let c = self.covariance[(obs.locations[a], obs.locations[b])];
            if a == b {
                c + noise_var
            } else {
                c
            }
        });
        let chol = Cholesky::new(block).ok_or(Error::SingularObservationBlock)?;
        // cross: n × k, C_{:,o}
        let cross = DMatrix::from_fn(n, k, |i, a| self.covariance[(i, obs.locations[a])]);
        let residual = DVector::from_iterator(
            k,
            obs.locations
                .iter()
                .zip(&obs.values)
                .map(|(&l, &y)| y - self.mean[l]),
        );
        let alpha = chol.solve(&residual);
        let mean: Vec<f64> = (0..n)
            .map(|i| self.mean[i] + (cross.row(i) * &alpha)[(0, 0)])
            .collect();
        // gain = C_{:,o} (C_oo + s² I)^{-1}, via solve on the transpose.
        let gain_t = chol.solve(&cross.transpose());
        let mut cov = &self.covariance - &cross * gain_t;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        PixelGrf::new(mean, cov)
    }
}

fn symmetric_root(c: &DMatrix<f64>) -> Result<Vec<f64>> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("covariance contains non-finite entries".into()));
    }
    let eig = match SymmetricEigen::try_new(c.clone(), f64::EPSILON, 0) {
        Some(e) => e,
        None => {
            let n = c.nrows();
            let jittered = c + DMatrix::<f64>::identity(n, n) * ROOT_JITTER;
            SymmetricEigen::try_new(jittered, f64::EPSILON, 0)
                .ok_or_else(|| Error::Eigen("QR iteration did not converge".into()))?
        }
    };
    let n = c.nrows();
    let v = &eig.eigenvectors;
    let s: Vec<f64> = eig.eigenvalues.iter().map(|l| sqrt(l.max(0.0))).collect();
    let scaled = DMatrix::from_fn(n, n, |i, k| v[(i, k)] * s[k]);
    let root = scaled * v.transpose();
    let mut out = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = 0.5 * (root[(i, j)] + root[(j, i)]);
            out[i * n + j] = x;
            out[j * n + i] = x;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid2D;
    use crate::math::{abs, ln};

    fn small() -> (Grid2D, PixelGrf) {
        let g = Grid2D::new(9, 9, 90.0, 90.0, 5.0).unwrap();
        let grf = PixelGrf::stationary(&g, &ExpCovariance::new(3.0, 25.0).unwrap(), ln(5e-5)).unwrap();
        (g, grf)
    }

    #[test]
    fn root_reproduces_covariance() {
        let (_, grf) = small();
        let r = grf.covariance_root();
        let back = &r * r.transpose();
        let c = grf.covariance();
        let scale = c.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
        let err = (back - c).iter().fold(0.0f64, |m, v| m.max(abs(*v)));
        assert!(err / scale < 1e-6, "relative error {err}");
    }

    #[test]
    fn zero_latent_gives_mean() {
        let (g, grf) = small();
        let x = grf.sample(&alloc::vec![0.0; g.len()]).unwrap();
        assert!(x.iter().all(|v| *v == ln(5e-5)));
    }

    #[test]
    fn wrong_length_rejected() {
        let (_, grf) = small();
        assert!(grf.sample(&[0.0; 3]).is_err());
    }

    #[test]
    fn conditioning_limits() {
        let (g, grf) = small();
        let loc = g.index(4, 4);
        let loose = grf
            .condition(&PointObservations {
                locations: alloc::vec![loc],
                values: alloc::vec![ln(5e-5) + 2.0],
                noise_sd: 1e6,
            })
            .unwrap();
        for (a, b) in loose.mean().iter().zip(grf.mean()) {
            assert!(abs(a - b) < 1e-4);
        }
        let tight = grf
            .condition(&PointObservations {
                locations: alloc::vec![loc, g.index(1, 1)],
                values: alloc::vec![ln(5e-5) + 2.0, ln(5e-5) - 1.0],
                noise_sd: 1e-6,
            })
            .unwrap();
        assert!(abs(tight.mean()[loc] - (ln(5e-5) + 2.0)) < 1e-6);
        let zero = tight.sample(&alloc::vec![0.0; g.len()]).unwrap();
        assert_eq!(zero, tight.mean());
    }

    #[test]
    fn conditioning_reduces_variance() {
        let (g, grf) = small();
        let obs = PointObservations {
            locations: alloc::vec![g.index(4, 4), g.index(2, 2), g.index(6, 6)],
            values: alloc::vec![-9.0, -10.0, -11.0],
            noise_sd: 0.1,
        };
        let cond = grf.condition(&obs).unwrap();
        for (post, prior) in cond.variances().iter().zip(grf.variances()) {
            assert!(*post <= prior + 1e-10);
        }
        assert!(cond.variances()[g.index(4, 4)] < 0.1);
    }

    #[test]
    fn bad_location_rejected() {
        let (_, grf) = small();
        let obs = PointObservations {
            locations: alloc::vec![1000],
            values: alloc::vec![0.0],
            noise_sd: 0.1,
        };
        assert!(grf.condition(&obs).is_err());
    }
}
