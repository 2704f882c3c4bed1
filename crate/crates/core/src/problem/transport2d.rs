use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{ForwardProblem, SyntheticTruth};
use crate::error::{check_len, Error, Result};
use crate::fields::{ExpCovariance, Grid2D, PixelGrf, PointObservations};
use crate::forward::{
    log_likelihood, qoi_breakthrough_2d, solve_flow_2d, FlowBoundary, Observation, QoiResult,
    TransportParams, Well,
};
use crate::math::ln;
use crate::rng::{standard_normal_vec, stream_rng, TRUTH_STREAM};

/// Settings of the 2-D pumping-test and contamination case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Transport2dSetup {
    pub nx: usize,
    pub ny: usize,
    pub length_x: f64,
    pub length_y: f64,
    pub thickness: f64,
    pub sigma: f64,
    pub length_scale: f64,
    pub mean_log: f64,
    /// Extraction rate at the central well, m³/s.
    pub pumping_rate: f64,
    pub left_head: f64,
    pub right_head: f64,
    pub head_noise_sd: f64,
    pub log_t_noise_sd: f64,
    pub transport: TransportParams,
}

impl Default for Transport2dSetup {
    fn default() -> Self {
        Self {
            nx: 51,
            ny: 51,
            length_x: 250.0,
            length_y: 250.0,
            thickness: 5.0,
            sigma: 3.0,
            length_scale: 25.0,
            mean_log: ln(5e-5),
            pumping_rate: 5e-4,
            left_head: 2.5,
            right_head: 0.0,
            head_noise_sd: 0.02,
            log_t_noise_sd: 0.1,
            transport: TransportParams::default(),
        }
    }
}

impl Transport2dSetup {
    /// Reduced 26 × 26 grid over the same domain.
    pub fn desk() -> Self {
        Self {
            nx: 26,
            ny: 26,
            ..Self::default()
        }
    }
}

/// Pumping well at the centre cell and observation wells at the centres of
/// the four quadrants.
pub fn well_layout(grid: &Grid2D) -> (usize, [usize; 4]) {
    let (q1x, q3x) = (grid.nx / 4, 3 * grid.nx / 4);
    let (q1y, q3y) = (grid.ny / 4, 3 * grid.ny / 4);
    (
        grid.index(grid.nx / 2, grid.ny / 2),
        [
            grid.index(q1x, q1y),
            grid.index(q1x, q3y),
            grid.index(q3x, q1y),
            grid.index(q3x, q3y),
        ],
    )
}

/// Pixel log-transmissivity field. Data are steady heads in four
/// observation wells during pumping at the centre (local log-transmissivity
/// values at all five wells enter through the conditioned prior); the
/// quantity of interest is the breakthrough time in days at the middle of the
/// right edge.
#[derive(Debug, Clone)]
pub struct Transport2d {
    setup: Transport2dSetup,
    grid: Grid2D,
    grf: PixelGrf,
    pumping_well: usize,
    observation_wells: [usize; 4],
    data: Option<Observation>,
}

impl Transport2d {
    /// Unconditioned prior, no likelihood.
    pub fn prior(setup: Transport2dSetup) -> Result<Self> {
        let grid = Grid2D::new(setup.nx, setup.ny, setup.length_x, setup.length_y, setup.thickness)?;
        if setup.nx < 4 || setup.ny < 4 {
            return Err(Error::invalid("grid must be at least 4 × 4"));
        }
        setup.transport.validate()?;
        let cov = ExpCovariance::new(setup.sigma, setup.length_scale)?;
        let grf = PixelGrf::stationary(&grid, &cov, setup.mean_log)?;
        let (pumping_well, observation_wells) = well_layout(&grid);
        Ok(Self {
            pumping_well,
            setup,
            grid,
            grf,
            observation_wells,
            data: None,
        })
    }

    /// Posterior case: the prior is conditioned on the noisy local
    /// log-transmissivity values and the likelihood uses the four heads.
    /// `observed` is the 9-vector produced by [`Transport2d::observe`].
    pub fn with_data(mut self, observed: &[f64]) -> Result<Self> {
        check_len(9, observed.len())?;
        let local = PointObservations {
            locations: self.all_wells().to_vec(),
            values: observed[4..].to_vec(),
            noise_sd: self.setup.log_t_noise_sd,
        };
        self.grf = self.grf.condition(&local)?;
        self.data = Some(Observation::with_common_sd(
            observed[..4].to_vec(),
            self.setup.head_noise_sd,
        )?);
        Ok(self)
    }

    pub fn setup(&self) -> &Transport2dSetup {
        &self.setup
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn grf(&self) -> &PixelGrf {
        &self.grf
    }

    pub fn pumping_well(&self) -> usize {
        self.pumping_well
    }

    pub fn observation_wells(&self) -> [usize; 4] {
        self.observation_wells
    }

    /// Pumping well first, then the four observation wells.
    pub fn all_wells(&self) -> [usize; 5] {
        let [a, b, c, d] = self.observation_wells;
        [self.pumping_well, a, b, c, d]
    }

    pub fn data(&self) -> Option<&Observation> {
        self.data.as_ref()
    }

    pub fn log_field(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.grf.sample(z)
    }

    /// Steady heads of the pumping test.
    pub fn pumping_heads(&self, log_field: &[f64]) -> Result<Vec<f64>> {
        let b = FlowBoundary {
            left_head: self.setup.left_head,
            right_head: self.setup.right_head,
            wells: alloc::vec![Well {
                cell: self.pumping_well,
                rate: self.setup.pumping_rate,
            }],
        };
        Ok(solve_flow_2d(&self.grid, log_field, &b)?.heads)
    }

    /// Heads at the four observation wells followed by the log-field at the
    /// five wells.
    pub fn observe(&self, heads: &[f64], log_field: &[f64]) -> Result<Vec<f64>> {
        check_len(self.grid.len(), heads.len())?;
        check_len(self.grid.len(), log_field.len())?;
        let mut out: Vec<f64> = self.observation_wells.iter().map(|&w| heads[w]).collect();
        out.extend(self.all_wells().iter().map(|&w| log_field[w]));
        Ok(out)
    }

    pub fn breakthrough(&self, z: &[f64], limit: Option<f64>) -> Result<QoiResult> {
        qoi_breakthrough_2d(&self.grid, &self.log_field(z)?, &self.setup.transport, limit)
    }

    /// True field drawn from the unconditioned prior; heads perturbed with
    /// the head noise level and local values with the log-scale level.
    pub fn generate_truth(&self, seed: u64) -> Result<SyntheticTruth> {
        let mut rng = stream_rng(seed, TRUTH_STREAM);
        let prior = Transport2d::prior(self.setup.clone())?;
        let z = standard_normal_vec(&mut rng, self.grid.len());
        let field = prior.log_field(&z)?;
        let noiseless = prior.observe(&prior.pumping_heads(&field)?, &field)?;
        let noise = standard_normal_vec(&mut rng, noiseless.len());
        let mut noise_sd = alloc::vec![self.setup.head_noise_sd; 4];
        noise_sd.extend([self.setup.log_t_noise_sd; 5]);
        let observed = noiseless
            .iter()
            .zip(&noise)
            .zip(&noise_sd)
            .map(|((g, e), s)| g + s * e)
            .collect();
        let q = qoi_breakthrough_2d(&self.grid, &field, &self.setup.transport, None)?;
        Ok(SyntheticTruth {
            seed,
            z,
            field,
            noiseless,
            observed,
            noise_sd,
            qoi: q.value,
            qoi_censored: q.censored,
        })
    }
}

impl ForwardProblem for Transport2d {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn has_data(&self) -> bool {
        self.data.is_some()
    }

    fn log_likelihood(&self, z: &[f64]) -> Result<f64> {
        let Some(obs) = &self.data else {
            return Ok(0.0);
        };
        let field = self.log_field(z)?;
        let heads = self.pumping_heads(&field)?;
        let sim: Vec<f64> = self.observation_wells.iter().map(|&w| heads[w]).collect();
        log_likelihood(obs, &sim)
    }

    fn qoi(&self, z: &[f64], limit: Option<f64>) -> Result<f64> {
        Ok(self.breakthrough(z, limit)?.value)
    }

    fn field(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.log_field(z)
    }
}
