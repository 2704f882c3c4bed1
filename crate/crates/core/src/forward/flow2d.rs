use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::banded::BandedSpd;
use crate::error::{check_len, Error, Result};
use crate::fields::Grid2D;
use crate::math::{abs, exp};

const MASS_BALANCE_TOL: f64 = 1e-8;

/// Extraction well: `rate` in m³/s, positive when pumping water out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub cell: usize,
    pub rate: f64,
}

/// Fixed heads on the left (`x = 0`) and right (`x = Lx`) edges, no-flow
/// top and bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBoundary {
    pub left_head: f64,
    pub right_head: f64,
    pub wells: Vec<Well>,
}

/// Volumetric face fluxes in m³/s, positive along +x / +y.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxes {
    /// `(nx + 1) × ny`, index `j * (nx + 1) + i`; face `i` is the left face
    /// of cell `i`.
    pub x: Vec<f64>,
    /// `nx × (ny + 1)`, index `j * nx + i`; face `j` is the bottom face of
    /// row `j`.
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub heads: Vec<f64>,
    pub fluxes: FaceFluxes,
    /// Total inflow through fixed-head edges, m³/s.
    pub boundary_inflow: f64,
}

#[inline]
fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Five-point finite-difference steady confined flow. The field is the
/// log-transmissivity (m²/s) per cell.
pub fn solve_flow_2d(grid: &Grid2D, log_transmissivity: &[f64], boundary: &FlowBoundary) -> Result<FlowSolution> {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = grid.len();
    check_len(n, log_transmissivity.len())?;
    let t: Vec<f64> = log_transmissivity.iter().map(|l| exp(*l)).collect();
    if t.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::NonFinite);
    }
    let rx = grid.dy / grid.dx;
    let ry = grid.dx / grid.dy;

    let mut a = BandedSpd::zeros(n, nx);
    let mut rhs = alloc::vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let p = grid.index(i, j);
            if i + 1 < nx {
                let c = harmonic(t[p], t[p + 1]) * rx;
                a.add(p, p, c);
                a.add(p + 1, p + 1, c);
                a.add(p + 1, p, -c);
            }
            if j + 1 < ny {
                let c = harmonic(t[p], t[p + nx]) * ry;
                a.add(p, p, c);
                a.add(p + nx, p + nx, c);
                a.add(p + nx, p, -c);
            }
        }
        let left = grid.index(0, j);
        let cl = 2.0 * t[left] * rx;
        a.add(left, left, cl);
        rhs[left] += cl * boundary.left_head;
        let right = grid.index(nx - 1, j);
        let cr = 2.0 * t[right] * rx;
        a.add(right, right, cr);
        rhs[right] += cr * boundary.right_head;
    }
    for w in &boundary.wells {
        if w.cell >= n {
            return Err(Error::invalid("well outside grid"));
        }
        rhs[w.cell] -= w.rate;
    }
    let mut heads = rhs;
    a.solve(&mut heads)?;

    let mut fx = alloc::vec![0.0; (nx + 1) * ny];
    let mut fy = alloc::vec![0.0; nx * (ny + 1)];
    for j in 0..ny {
        let row = j * (nx + 1);
        let left = grid.index(0, j);
        fx[row] = 2.0 * t[left] * rx * (boundary.left_head - heads[left]);
        for i in 1..nx {
            let p = grid.index(i, j);
            fx[row + i] = harmonic(t[p - 1], t[p]) * rx * (heads[p - 1] - heads[p]);
        }
        let right = grid.index(nx - 1, j);
        fx[row + nx] = 2.0 * t[right] * rx * (heads[right] - boundary.right_head);
    }
    for j in 1..ny {
        for i in 0..nx {
            let p = grid.index(i, j);
            fy[j * nx + i] = harmonic(t[p - nx], t[p]) * ry * (heads[p - nx] - heads[p]);
        }
    }

    let mut inflow = 0.0;
    for j in 0..ny {
        let l = fx[j * (nx + 1)];
        let r = fx[j * (nx + 1) + nx];
        inflow += l.max(0.0) + (-r).max(0.0);
    }
    let pumped: f64 = boundary.wells.iter().map(|w| abs(w.rate)).sum();
    let scale = inflow.max(pumped);
    if scale > 0.0 {
        let mut worst = 0.0f64;
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.index(i, j);
                let net = fx[j * (nx + 1) + i] - fx[j * (nx + 1) + i + 1] + fy[j * nx + i]
                    - fy[(j + 1) * nx + i];
                worst = worst.max(abs(net - well_rate(boundary, p)));
            }
        }
        let residual = worst / scale;
        if !(residual < MASS_BALANCE_TOL) {
            return Err(Error::MassBalance { residual });
        }
    }

    Ok(FlowSolution {
        heads,
        fluxes: FaceFluxes { x: fx, y: fy },
        boundary_inflow: inflow,
    })
}

fn well_rate(boundary: &FlowBoundary, cell: usize) -> f64 {
    boundary
        .wells
        .iter()
        .filter(|w| w.cell == cell)
        .map(|w| w.rate)
        .sum()
}
