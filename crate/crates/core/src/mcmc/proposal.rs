use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::math::{sqrt, std_normal_logpdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalKind {
    GaussianWalk,
    Pcn,
}

/// A concrete proposal for a standard-normal latent prior.
#[derive(Debug, Clone, PartialEq)]
pub enum Proposal {
    /// `z' = z + s ⊙ ξ`.
    GaussianWalk { scales: Vec<f64> },
    /// `z' = √(1−ρ²) z + ρ ξ`; leaves the prior invariant.
    Pcn { rho: f64 },
}

impl Proposal {
    pub fn propose<R: Rng + ?Sized>(&self, z: &[f64], rng: &mut R, out: &mut [f64]) {
        match self {
            Proposal::GaussianWalk { scales } => {
                for ((o, &x), &s) in out.iter_mut().zip(z).zip(scales) {
                    let e: f64 = rng.sample(StandardNormal);
                    *o = x + s * e;
                }
            }
            Proposal::Pcn { rho } => propose_pcn(z, *rho, rng, out),
        }
    }

    /// Log prior ratio `log π(z') − log π(z)` the acceptance must include.
    /// Zero for pCN, whose proposal is reversible with respect to the prior.
    pub fn log_prior_correction(&self, z: &[f64], candidate: &[f64]) -> f64 {
        match self {
            Proposal::Pcn { .. } => 0.0,
            Proposal::GaussianWalk { .. } => z
                .iter()
                .zip(candidate)
                .map(|(&a, &b)| std_normal_logpdf(b) - std_normal_logpdf(a))
                .sum(),
        }
    }
}

pub fn propose_pcn<R: Rng + ?Sized>(z: &[f64], rho: f64, rng: &mut R, out: &mut [f64]) {
    let keep = sqrt((1.0 - rho * rho).max(0.0));
    for (o, &x) in out.iter_mut().zip(z) {
        let e: f64 = rng.sample(StandardNormal);
        *o = keep * x + rho * e;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;
    use crate::rng::stream_rng;

    #[test]
    fn rho_one_ignores_current_state() {
        let mut r1 = stream_rng(1, 0);
        let mut r2 = stream_rng(1, 0);
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        propose_pcn(&[5.0, -3.0, 2.0, 1.0], 1.0, &mut r1, &mut a);
        propose_pcn(&[0.0; 4], 1.0, &mut r2, &mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_rho_stays_put() {
        let mut rng = stream_rng(2, 0);
        let z = [0.3, -1.2, 2.2];
        let mut out = [0.0; 3];
        propose_pcn(&z, 1e-8, &mut rng, &mut out);
        let d: f64 = z.iter().zip(&out).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!(sqrt(d) < 1e-6);
    }

    #[test]
    fn pcn_preserves_standard_normal() {
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let mut z = [0.0; 2];
        let mut out = [0.0; 2];
        let (mut s1, mut s2) = ([0.0; 2], [0.0; 2]);
        for _ in 0..n {
            propose_pcn(&z, 0.5, &mut rng, &mut out);
            z = out;
            for k in 0..2 {
                s1[k] += z[k];
                s2[k] += z[k] * z[k];
            }
        }
        // autocorrelation √(1−ρ²) inflates the standard error of the mean
        let phi = sqrt(0.75);
        let se_mean = sqrt((1.0 + phi) / (1.0 - phi) / n as f64);
        let se_var = sqrt(2.0 * (1.0 + phi * phi) / (1.0 - phi * phi) / n as f64);
        for k in 0..2 {
            let m = s1[k] / n as f64;
            let v = s2[k] / n as f64 - m * m;
            assert!(abs(m) < 3.0 * se_mean, "mean {m}");
            assert!(abs(v - 1.0) < 3.0 * se_var, "var {v}");
        }
    }

    #[test]
    fn walk_prior_correction() {
        let p = Proposal::GaussianWalk { scales: alloc::vec![1.0] };
        let c = p.log_prior_correction(&[0.0], &[1.0]);
        assert!(abs(c + 0.5) < 1e-15);
        assert_eq!(Proposal::Pcn { rho: 0.3 }.log_prior_correction(&[0.0], &[1.0]), 0.0);
    }
}
