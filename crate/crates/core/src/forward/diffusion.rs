use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::banded::solve_tridiagonal;
use crate::error::{check_len, Error, Result};
use crate::fields::Grid1D;
use crate::math::{abs, exp};

/// Point-located sources, each spread over the cell that contains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sources1D {
    /// Positions in meters, strictly inside the domain.
    pub positions: Vec<f64>,
    /// Source rates `b` in 1/s.
    pub strengths: Vec<f64>,
}

impl Sources1D {
    pub fn none() -> Self {
        Self {
            positions: Vec::new(),
            strengths: Vec::new(),
        }
    }

    /// Source rate per cell.
    pub fn to_cells(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        check_len(self.positions.len(), self.strengths.len())?;
        let mut b = alloc::vec![0.0; grid.n_cells()];
        for (&x, &s) in self.positions.iter().zip(&self.strengths) {
            if !(x > 0.0 && x < grid.length()) {
                return Err(Error::invalid("source position must lie inside the domain"));
            }
            let i = grid.cell_containing(x).expect("checked above");
            b[i] += s;
        }
        Ok(b)
    }
}

/// Steady `d/dx(θ dh/dx) + b = 0` on a cell-centered grid with
/// `h(0) = h(L) = 0`.
///
/// Interior faces use the harmonic mean of the two adjacent conductivities;
/// boundary faces sit half a cell from the first and last centers. Returns
/// heads at cell centers.
pub fn solve_diffusion_1d(grid: &Grid1D, log_field: &[f64], sources: &Sources1D) -> Result<Vec<f64>> {
    let n = grid.n_cells();
    check_len(n, log_field.len())?;
    let h = grid.cell_width();
    let theta: Vec<f64> = log_field.iter().map(|l| exp(*l)).collect();
    if theta.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::NonFinite);
    }
    let b = sources.to_cells(grid)?;

    // face conductances: faces[0] is x = 0, faces[n] is x = L
    let mut faces = alloc::vec![0.0; n + 1];
    faces[0] = 2.0 * theta[0] / h;
    faces[n] = 2.0 * theta[n - 1] / h;
    for i in 1..n {
        let harm = 2.0 * theta[i - 1] * theta[i] / (theta[i - 1] + theta[i]);
        faces[i] = harm / h;
    }
    let mut lower = alloc::vec![0.0; n];
    let mut diag = alloc::vec![0.0; n];
    let mut upper = alloc::vec![0.0; n];
    let rhs: Vec<f64> = b.iter().map(|bi| bi * h).collect();
    for i in 0..n {
        diag[i] = faces[i] + faces[i + 1];
        if i > 0 {
            lower[i] = -faces[i];
        }
        if i + 1 < n {
            upper[i] = -faces[i + 1];
        }
    }
    let heads = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;

    let scale = rhs.iter().map(|r| abs(*r)).sum::<f64>();
    if scale > 0.0 {
        let mut res = 0.0;
        for i in 0..n {
            let mut r = diag[i] * heads[i] - rhs[i];
            if i > 0 {
                r += lower[i] * heads[i - 1];
            }
            if i + 1 < n {
                r += upper[i] * heads[i + 1];
            }
            res += abs(r);
        }
        if !(res / scale < 1e-10) {
            return Err(Error::SingularSystem { row: n });
        }
    }
    Ok(heads)
}

/// `n` sensors spaced uniformly on the open domain: `x_m = m L / (n + 1)`.
pub fn sensor_positions(grid: &Grid1D, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|m| m as f64 * grid.length() / (n + 1) as f64)
        .collect()
}

/// Linear interpolation of cell-centered heads at the sensor positions,
/// using the zero-head boundary values outside the first and last centers.
pub fn observe_1d(grid: &Grid1D, heads: &[f64], sensors: &[f64]) -> Result<Vec<f64>> {
    let centers = grid.cell_centers();
    check_len(centers.len(), heads.len())?;
    let mut xs = Vec::with_capacity(centers.len() + 2);
    let mut hs = Vec::with_capacity(centers.len() + 2);
    xs.push(0.0);
    hs.push(0.0);
    xs.extend_from_slice(&centers);
    hs.extend_from_slice(heads);
    xs.push(grid.length());
    hs.push(0.0);
    sensors
        .iter()
        .map(|&x| {
            if !(0.0..=grid.length()).contains(&x) {
                return Err(Error::invalid("sensor outside domain"));
            }
            let k = xs.partition_point(|&c| c <= x).clamp(1, xs.len() - 1);
            let (x0, x1) = (xs[k - 1], xs[k]);
            let t = (x - x0) / (x1 - x0);
            Ok(hs[k - 1] + t * (hs[k] - hs[k - 1]))
        })
        .collect()
}

/// Flow rate through the column under a unit head drop over unit length:
/// the harmonic mean of the cell conductivities.
pub fn qoi_flow_rate_1d(log_field: &[f64], head_drop: f64, length: f64) -> f64 {
    let n = log_field.len() as f64;
    let inv: f64 = log_field.iter().map(|l| exp(-*l)).sum();
    n / inv * head_drop / length
}
