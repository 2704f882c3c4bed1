use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::proposal::{Proposal, ProposalKind};
use crate::math::exp;

const TARGET_RATE: f64 = 0.3;
const GAIN: f64 = 0.5;
const RHO_MIN: f64 = 1e-6;
const SCALE_FLOOR: f64 = 1e-8;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl AcceptanceStats {
    #[inline]
    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn merge(&mut self, other: &Self) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
    }

    /// `None` before the first proposal.
    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

/// `scale · exp(0.5 · (rate − 0.3))`.
pub fn adapt_scale(scale: f64, rate: f64) -> f64 {
    scale * exp(GAIN * (rate - TARGET_RATE))
}

/// Multiplicative update toward a 30 % acceptance rate; ρ stays in
/// `[1e-6, 1]`. Unchanged when no proposal was made.
pub fn adapt_step_size(stats: &AcceptanceStats, proposal: &Proposal) -> Proposal {
    let Some(rate) = stats.rate() else {
        return proposal.clone();
    };
    match proposal {
        Proposal::GaussianWalk { scales } => Proposal::GaussianWalk {
            scales: scales.iter().map(|s| adapt_scale(*s, rate)).collect(),
        },
        Proposal::Pcn { rho } => Proposal::Pcn {
            rho: adapt_scale(*rho, rate).clamp(RHO_MIN, 1.0),
        },
    }
}

/// How the step size evolves between batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum StepControl {
    Fixed,
    /// Acceptance-driven multiplicative update after every batch.
    Adapt,
    /// Geometric decay once per level, never below `floor`.
    Decay { factor: f64, floor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub kind: ProposalKind,
    /// Walk scale factor or pCN ρ.
    pub initial: f64,
    pub control: StepControl,
    /// Walk only: multiply the factor by the per-coordinate particle
    /// standard deviation.
    pub scale_to_particles: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: ProposalKind::Pcn,
            initial: 0.5,
            control: StepControl::Adapt,
            scale_to_particles: false,
        }
    }
}

impl KernelConfig {
    pub fn pcn_adaptive(rho: f64) -> Self {
        Self {
            kind: ProposalKind::Pcn,
            initial: rho,
            control: StepControl::Adapt,
            scale_to_particles: false,
        }
    }

    /// pCN starting from independent proposals, ρ shrinking by 0.9 per level.
    pub fn pcn_decay() -> Self {
        Self {
            kind: ProposalKind::Pcn,
            initial: 1.0,
            control: StepControl::Decay {
                factor: 0.9,
                floor: 1e-3,
            },
            scale_to_particles: false,
        }
    }

    pub fn walk_adaptive(initial: f64) -> Self {
        Self {
            kind: ProposalKind::GaussianWalk,
            initial,
            control: StepControl::Adapt,
            scale_to_particles: true,
        }
    }
}

/// Mutable step-size state built from a [`KernelConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelState {
    config: KernelConfig,
    factor: f64,
    base: Vec<f64>,
}

impl KernelState {
    pub fn new(config: &KernelConfig, dim: usize) -> Self {
        let factor = match config.kind {
            ProposalKind::Pcn => config.initial.clamp(RHO_MIN, 1.0),
            ProposalKind::GaussianWalk => config.initial,
        };
        Self {
            config: config.clone(),
            factor,
            base: alloc::vec![1.0; dim],
        }
    }

    /// Walk scale factor or pCN ρ.
    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn proposal(&self) -> Proposal {
        match self.config.kind {
            ProposalKind::Pcn => Proposal::Pcn { rho: self.factor },
            ProposalKind::GaussianWalk => Proposal::GaussianWalk {
                scales: self.base.iter().map(|b| b * self.factor).collect(),
            },
        }
    }

    /// Per-coordinate spread of the current particles.
    pub fn set_spread(&mut self, sd: &[f64]) {
        if self.config.kind == ProposalKind::GaussianWalk && self.config.scale_to_particles {
            for (b, s) in self.base.iter_mut().zip(sd) {
                *b = s.max(SCALE_FLOOR);
            }
        }
    }

    pub fn after_batch(&mut self, stats: &AcceptanceStats) {
        if self.config.control != StepControl::Adapt {
            return;
        }
        if let Some(rate) = stats.rate() {
            self.factor = adapt_scale(self.factor, rate);
            if self.config.kind == ProposalKind::Pcn {
                self.factor = self.factor.clamp(RHO_MIN, 1.0);
            }
        }
    }

    pub fn after_level(&mut self) {
        if let StepControl::Decay { factor, floor } = self.config.control {
            self.factor = (self.factor * factor).max(floor);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(p: u64, a: u64) -> AcceptanceStats {
        AcceptanceStats {
            proposed: p,
            accepted: a,
        }
    }

    #[test]
    fn fixed_point_and_direction() {
        let p = Proposal::Pcn { rho: 0.4 };
        assert_eq!(adapt_step_size(&stats(10, 3), &p), p);
        let Proposal::Pcn { rho } = adapt_step_size(&stats(10, 10), &p) else { unreachable!() };
        assert!(rho > 0.4);
        let Proposal::Pcn { rho } = adapt_step_size(&stats(10, 0), &p) else { unreachable!() };
        assert!(rho < 0.4);
        let Proposal::Pcn { rho } = adapt_step_size(&stats(10, 10), &Proposal::Pcn { rho: 1.0 }) else {
            unreachable!()
        };
        assert_eq!(rho, 1.0);
    }

    #[test]
    fn decay_has_floor() {
        let mut k = KernelState::new(&KernelConfig::pcn_decay(), 3);
        assert_eq!(k.factor(), 1.0);
        k.after_level();
        assert!(crate::math::abs(k.factor() - 0.9) < 1e-15);
        for _ in 0..200 {
            k.after_level();
        }
        assert_eq!(k.factor(), 1e-3);
        k.after_batch(&stats(10, 10));
        assert_eq!(k.factor(), 1e-3);
    }

    #[test]
    fn walk_uses_particle_spread() {
        let mut k = KernelState::new(&KernelConfig::walk_adaptive(0.5), 2);
        k.set_spread(&[2.0, 0.1]);
        assert_eq!(
            k.proposal(),
            Proposal::GaussianWalk {
                scales: alloc::vec![1.0, 0.05]
            }
        );
    }

    #[test]
    fn no_stats_no_change() {
        let p = Proposal::GaussianWalk { scales: alloc::vec![0.3] };
        assert_eq!(adapt_step_size(&AcceptanceStats::default(), &p), p);
    }
}
