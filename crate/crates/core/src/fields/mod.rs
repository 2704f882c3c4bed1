//! Gaussian priors for log-conductivity and log-transmissivity fields.

mod covariance;
mod grf;
mod grid;
mod kl;

pub use covariance::{build_exp_covariance, ExpCovariance};
pub use grf::{PixelGrf, PointObservations};
pub use grid::{CellCenters, Grid1D, Grid2D};
pub use kl::{kl_decompose, KlBasis};
