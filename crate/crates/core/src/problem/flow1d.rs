use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{ForwardProblem, SyntheticTruth};
use crate::error::{check_len, Error, Result};
use crate::fields::{build_exp_covariance, kl_decompose, ExpCovariance, Grid1D, KlBasis};
use crate::forward::{
    log_likelihood, observe_1d, qoi_flow_rate_1d, sensor_positions, solve_diffusion_1d,
    Observation, Sources1D,
};
use crate::math::ln;
use crate::rng::{standard_normal_vec, stream_rng, TRUTH_STREAM};

/// Settings of the 1-D steady diffusion case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Flow1dSetup {
    pub n_cells: usize,
    pub length: f64,
    pub sigma: f64,
    pub length_scale: f64,
    pub n_terms: usize,
    pub mean_log: f64,
    pub source_positions: Vec<f64>,
    pub source_strength: f64,
    pub n_sensors: usize,
    pub noise_sd: f64,
    /// Head difference driving the flow-rate quantity, m.
    pub head_drop: f64,
}

impl Default for Flow1dSetup {
    fn default() -> Self {
        Self {
            n_cells: 40,
            length: 1.0,
            sigma: 3.0,
            length_scale: 0.3,
            n_terms: 10,
            mean_log: ln(1e-5),
            source_positions: alloc::vec![0.26, 0.51, 0.76],
            source_strength: 0.001,
            n_sensors: 7,
            noise_sd: 0.01,
            head_drop: 1.0,
        }
    }
}

/// Log-conductivity from a truncated KL expansion; data are heads at
/// uniformly spaced sensors; the quantity of interest is the flow rate under
/// a unit head drop.
#[derive(Debug, Clone)]
pub struct Flow1d {
    setup: Flow1dSetup,
    grid: Grid1D,
    basis: KlBasis,
    sources: Sources1D,
    sensors: Vec<f64>,
    data: Option<Observation>,
}

impl Flow1d {
    pub fn new(setup: Flow1dSetup) -> Result<Self> {
        let grid = Grid1D::new(setup.n_cells, setup.length)?;
        let cov = ExpCovariance::new(setup.sigma, setup.length_scale)?;
        let basis = kl_decompose(&build_exp_covariance(&grid, &cov), setup.n_terms, setup.mean_log)?;
        if setup.n_sensors == 0 {
            return Err(Error::invalid("need at least one sensor"));
        }
        let sources = Sources1D {
            strengths: alloc::vec![setup.source_strength; setup.source_positions.len()],
            positions: setup.source_positions.clone(),
        };
        sources.to_cells(&grid)?;
        let sensors = sensor_positions(&grid, setup.n_sensors);
        Ok(Self {
            setup,
            grid,
            basis,
            sources,
            sensors,
            data: None,
        })
    }

    /// The same case conditioned on observed sensor heads.
    pub fn with_data(mut self, observed: Vec<f64>) -> Result<Self> {
        check_len(self.sensors.len(), observed.len())?;
        self.data = Some(Observation::with_common_sd(observed, self.setup.noise_sd)?);
        Ok(self)
    }

    pub fn setup(&self) -> &Flow1dSetup {
        &self.setup
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn basis(&self) -> &KlBasis {
        &self.basis
    }

    pub fn sensors(&self) -> &[f64] {
        &self.sensors
    }

    pub fn data(&self) -> Option<&Observation> {
        self.data.as_ref()
    }

    pub fn log_field(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.basis.log_field(z)
    }

    pub fn heads(&self, z: &[f64]) -> Result<Vec<f64>> {
        solve_diffusion_1d(&self.grid, &self.log_field(z)?, &self.sources)
    }

    /// Noiseless sensor heads.
    pub fn forward(&self, z: &[f64]) -> Result<Vec<f64>> {
        observe_1d(&self.grid, &self.heads(z)?, &self.sensors)
    }

    pub fn generate_truth(&self, seed: u64) -> Result<SyntheticTruth> {
        let mut rng = stream_rng(seed, TRUTH_STREAM);
        let z = standard_normal_vec(&mut rng, self.dim());
        let noiseless = self.forward(&z)?;
        let noise = standard_normal_vec(&mut rng, noiseless.len());
        let sd = self.setup.noise_sd;
        let observed = noiseless.iter().zip(&noise).map(|(g, e)| g + sd * e).collect();
        Ok(SyntheticTruth {
            seed,
            field: self.log_field(&z)?,
            qoi: self.qoi(&z, None)?,
            qoi_censored: false,
            noise_sd: alloc::vec![sd; noiseless.len()],
            z,
            noiseless,
            observed,
        })
    }
}

impl ForwardProblem for Flow1d {
    fn dim(&self) -> usize {
        self.basis.n_terms()
    }

    fn has_data(&self) -> bool {
        self.data.is_some()
    }

    fn log_likelihood(&self, z: &[f64]) -> Result<f64> {
        match &self.data {
            None => Ok(0.0),
            Some(obs) => log_likelihood(obs, &self.forward(z)?),
        }
    }

    fn qoi(&self, z: &[f64], _limit: Option<f64>) -> Result<f64> {
        let f = self.log_field(z)?;
        Ok(qoi_flow_rate_1d(&f, self.setup.head_drop, self.setup.length))
    }

    fn field(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.log_field(z)
    }
}
