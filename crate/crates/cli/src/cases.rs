//! Building the forward problem of a test case.

use anyhow::Context;
use postrisk_core::problem::{Flow1d, ForwardProblem, GaussianToy, SyntheticTruth, Transport2d};

use crate::config::{ExperimentConfig, TestCase};

/// A ready-to-run problem together with the truth it was conditioned on.
pub enum Case {
    Flow1d(Flow1d),
    Transport2d(Transport2d),
    Toy(GaussianToy),
}

impl Case {
    pub fn problem(&self) -> &dyn ForwardProblem {
        match self {
            Case::Flow1d(p) => p,
            Case::Transport2d(p) => p,
            Case::Toy(p) => p,
        }
    }

    /// Grid shape of `ForwardProblem::field`: `(nx, ny)`, `ny = 1` in 1-D.
    pub fn field_shape(&self) -> (usize, usize) {
        match self {
            Case::Flow1d(p) => (p.grid().n_cells(), 1),
            Case::Transport2d(p) => (p.grid().nx, p.grid().ny),
            Case::Toy(p) => (p.dim(), 1),
        }
    }
}

/// Synthetic truth of a case. The toy has none.
pub fn generate_truth(cfg: &ExperimentConfig, seed: u64) -> anyhow::Result<Option<SyntheticTruth>> {
    Ok(match cfg.test_case {
        TestCase::Flow1d => Some(Flow1d::new(cfg.flow1d.clone())?.generate_truth(seed)?),
        TestCase::Transport2d => Some(Transport2d::prior(cfg.transport2d.clone())?.generate_truth(seed)?),
        TestCase::GaussianToy => None,
    })
}

/// Builds the problem, conditioned on the configured truth when the method
/// and `[data]` ask for it.
pub fn build(cfg: &ExperimentConfig) -> anyhow::Result<(Case, Option<SyntheticTruth>)> {
    let with_data = cfg.data.use_data && cfg.method.uses_data();
    match cfg.test_case {
        TestCase::GaussianToy => {
            let t = &cfg.gaussian_toy;
            let toy = match t.observation {
                Some(y) if with_data => GaussianToy::with_observation(t.dim, y, t.noise_sd)?,
                _ => GaussianToy::prior(t.dim)?,
            };
            Ok((Case::Toy(toy), None))
        }
        TestCase::Flow1d => {
            let base = Flow1d::new(cfg.flow1d.clone())?;
            if !with_data {
                return Ok((Case::Flow1d(base), None));
            }
            let truth = base.generate_truth(cfg.data.truth_seed)?;
            let p = base.with_data(truth.observed.clone())?;
            Ok((Case::Flow1d(p), Some(truth)))
        }
        TestCase::Transport2d => {
            let base = Transport2d::prior(cfg.transport2d.clone()).context("building the pixel field")?;
            if !with_data {
                return Ok((Case::Transport2d(base), None));
            }
            let truth = base.generate_truth(cfg.data.truth_seed)?;
            let p = base.with_data(&truth.observed)?;
            Ok((Case::Transport2d(p), Some(truth)))
        }
    }
}
