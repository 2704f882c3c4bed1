//! Deterministic physics and the Gaussian likelihood.

mod banded;
mod diffusion;
mod flow2d;
mod likelihood;
mod transport;

pub use banded::{BandedSpd, solve_tridiagonal};
pub use diffusion::{
    observe_1d, qoi_flow_rate_1d, sensor_positions, solve_diffusion_1d, Sources1D,
};
pub use flow2d::{solve_flow_2d, FaceFluxes, FlowBoundary, FlowSolution, Well};
pub use likelihood::{log_likelihood, Observation};
pub use transport::{
    qoi_breakthrough_2d, QoiResult, TransportModel, TransportParams, SECONDS_PER_DAY,
};
