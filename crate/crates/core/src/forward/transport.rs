use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::flow2d::{solve_flow_2d, FlowBoundary};
use crate::error::{check_len, Error, Result};
use crate::fields::Grid2D;
use crate::math::hypot;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Physical and numerical settings for the contamination scenario.
/// Concentrations are in g/l, times in days, lengths in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransportParams {
    pub porosity: f64,
    /// Effective molecular diffusion, m²/s.
    pub molecular_diffusion: f64,
    pub longitudinal_dispersivity: f64,
    /// Transverse over longitudinal dispersivity.
    pub transverse_ratio: f64,
    pub source_concentration: f64,
    pub breakthrough_concentration: f64,
    pub horizon_days: f64,
    pub left_head: f64,
    pub right_head: f64,
    /// Fraction of the stability limit used for each step.
    pub courant: f64,
    pub max_dt_days: f64,
    pub max_steps: usize,
}

impl Default for TransportParams {
    fn default() -> Self {
        Self {
            porosity: 0.3,
            molecular_diffusion: 1e-9,
            longitudinal_dispersivity: 1.0,
            transverse_ratio: 0.1,
            source_concentration: 1.0,
            breakthrough_concentration: 1e-3,
            horizon_days: 3500.0,
            left_head: 2.5,
            right_head: 0.0,
            courant: 0.9,
            max_dt_days: 5.0,
            max_steps: 1_000_000,
        }
    }
}

impl TransportParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.porosity,
            self.molecular_diffusion,
            self.longitudinal_dispersivity,
            self.transverse_ratio,
            self.source_concentration,
            self.breakthrough_concentration,
            self.horizon_days,
            self.max_dt_days,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("transport parameters must be positive and finite"));
        }
        if self.breakthrough_concentration >= self.source_concentration {
            return Err(Error::invalid("breakthrough concentration must be below the source"));
        }
        if !(self.courant > 0.0 && self.courant <= 1.0) {
            return Err(Error::invalid("courant factor must lie in (0, 1]"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Scalar quantity of interest with a censoring flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoiResult {
    pub value: f64,
    /// The event never happened before the horizon; `value` is the horizon.
    pub censored: bool,
}

impl QoiResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            censored: false,
        }
    }
}

/// One face of the finite-volume mesh. `lo`/`hi` are cell indices, or
/// `None` for a boundary face; positive `q` flows from `lo` to `hi`.
#[derive(Debug, Clone, Copy)]
struct Face {
    lo: Option<usize>,
    hi: Option<usize>,
    /// Volumetric water flux, m³/s.
    q: f64,
    /// Dispersive conductance φ·D·A/Δ, m³/s.
    g: f64,
}

/// Explicit upwind advection-dispersion on a steady flow field.
#[derive(Debug, Clone)]
pub struct TransportModel {
    faces: Vec<Face>,
    /// Pore volume per cell, m³.
    pore_volume: f64,
    n: usize,
    monitor: usize,
    dt: f64,
    params: TransportParams,
}

impl TransportModel {
    pub fn new(grid: &Grid2D, log_transmissivity: &[f64], params: &TransportParams) -> Result<Self> {
        params.validate()?;
        check_len(grid.len(), log_transmissivity.len())?;
        let flow = solve_flow_2d(
            grid,
            log_transmissivity,
            &FlowBoundary {
                left_head: params.left_head,
                right_head: params.right_head,
                wells: Vec::new(),
            },
        )?;
        let (nx, ny) = (grid.nx, grid.ny);
        let b = grid.thickness;
        let phi = params.porosity;
        let fx = &flow.fluxes.x;
        let fy = &flow.fluxes.y;
        let ax = grid.dy * b;
        let ay = grid.dx * b;
        let al = params.longitudinal_dispersivity;
        let at = al * params.transverse_ratio;
        let dm = params.molecular_diffusion;
        let coeff = |along: f64, across: f64| {
            let speed = hypot(along, across);
            if speed > 0.0 {
                (al * along * along + at * across * across) / speed + dm
            } else {
                dm
            }
        };
        // seepage velocities through the x- and y-faces
        let vx = |i: usize, j: usize| fx[j * (nx + 1) + i] / (ax * phi);
        let vy = |i: usize, j: usize| fy[j * nx + i] / (ay * phi);
        let cell_vy = |i: usize, j: usize| 0.5 * (vy(i, j) + vy(i, j + 1));
        let cell_vx = |i: usize, j: usize| 0.5 * (vx(i, j) + vx(i + 1, j));

        let mut faces = Vec::with_capacity((nx + 1) * ny + nx * (ny - 1));
        for j in 0..ny {
            for i in 0..=nx {
                let v = vx(i, j);
                let (lo, hi, across, dist) = if i == 0 {
                    (None, Some(grid.index(0, j)), cell_vy(0, j), 0.5 * grid.dx)
                } else if i == nx {
                    (Some(grid.index(nx - 1, j)), None, cell_vy(nx - 1, j), f64::INFINITY)
                } else {
                    let across = 0.5 * (cell_vy(i - 1, j) + cell_vy(i, j));
                    (Some(grid.index(i - 1, j)), Some(grid.index(i, j)), across, grid.dx)
                };
                let g = if dist.is_finite() {
                    phi * coeff(v, across) * ax / dist
                } else {
                    0.0
                };
                faces.push(Face {
                    lo,
                    hi,
                    q: fx[j * (nx + 1) + i],
                    g,
                });
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let v = vy(i, j);
                let across = 0.5 * (cell_vx(i, j - 1) + cell_vx(i, j));
                faces.push(Face {
                    lo: Some(grid.index(i, j - 1)),
                    hi: Some(grid.index(i, j)),
                    q: fy[j * nx + i],
                    g: phi * coeff(v, across) * ay / grid.dy,
                });
            }
        }

        let pore_volume = grid.dx * grid.dy * b * phi;
        let n = grid.len();
        let mut diag = alloc::vec![0.0; n];
        for f in &faces {
            if let Some(lo) = f.lo {
                diag[lo] += f.q.max(0.0) + f.g;
            }
            if let Some(hi) = f.hi {
                diag[hi] += (-f.q).max(0.0) + f.g;
            }
        }
        let worst = diag.iter().copied().fold(0.0, f64::max);
        if !worst.is_finite() {
            return Err(Error::NonFinite);
        }
        let max_dt = params.max_dt_days * SECONDS_PER_DAY;
        let dt = if worst > 0.0 {
            (params.courant * pore_volume / worst).min(max_dt)
        } else {
            max_dt
        };
        Ok(Self {
            faces,
            pore_volume,
            n,
            monitor: grid.index(nx - 1, ny / 2),
            dt,
            params: params.clone(),
        })
    }

    /// Time step in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn monitor_cell(&self) -> usize {
        self.monitor
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    /// Solute mass in the domain (g/l · m³).
    pub fn mass(&self, c: &[f64]) -> f64 {
        c.iter().sum::<f64>() * self.pore_volume
    }

    /// Advances `c` by `dt` seconds; `rate` is scratch of the same length.
    /// Returns the net solute mass entering through the boundary.
    pub fn step(&self, c: &mut [f64], rate: &mut [f64], dt: f64) -> f64 {
        let c0 = self.params.source_concentration;
        rate.iter_mut().for_each(|r| *r = 0.0);
        let mut boundary = 0.0;
        for f in &self.faces {
            let cl = f.lo.map_or(c0, |k| c[k]);
            // inflow across the open right edge carries clean water
            let cr = f.hi.map_or(0.0, |k| c[k]);
            let flux = f.q.max(0.0) * cl - (-f.q).max(0.0) * cr + f.g * (cl - cr);
            match (f.lo, f.hi) {
                (Some(lo), Some(hi)) => {
                    rate[lo] -= flux;
                    rate[hi] += flux;
                }
                (None, Some(hi)) => {
                    rate[hi] += flux;
                    boundary += flux;
                }
                (Some(lo), None) => {
                    rate[lo] -= flux;
                    boundary -= flux;
                }
                (None, None) => {}
            }
        }
        let k = dt / self.pore_volume;
        for (ci, r) in c.iter_mut().zip(rate.iter()) {
            *ci += k * r;
        }
        boundary * dt
    }

    /// Concentration field after `days`.
    pub fn concentration_at(&self, days: f64) -> Result<Vec<f64>> {
        let mut c = alloc::vec![0.0; self.n];
        let mut rate = alloc::vec![0.0; self.n];
        let end = days * SECONDS_PER_DAY;
        let mut t = 0.0;
        let mut steps = 0;
        while t < end {
            let dt = self.dt.min(end - t);
            self.step(&mut c, &mut rate, dt);
            t += dt;
            steps += 1;
            if steps > self.params.max_steps {
                return Err(Error::MaxStepsExceeded {
                    max_steps: self.params.max_steps,
                });
            }
        }
        Ok(c)
    }

    /// First time (days) the monitor cell reaches the breakthrough level,
    /// linearly interpolated within the step. Simulation stops early once
    /// the clock passes `limit_days`; the result is then censored, which is
    /// all a caller comparing against `limit_days` needs.
    pub fn breakthrough(&self, limit_days: Option<f64>) -> Result<QoiResult> {
        let p = &self.params;
        let horizon = p.horizon_days * SECONDS_PER_DAY;
        let stop = limit_days.map_or(horizon, |l| (l * SECONDS_PER_DAY).min(horizon));
        let censored = QoiResult {
            value: p.horizon_days,
            censored: true,
        };
        if !(stop > 0.0) {
            return Ok(censored);
        }
        let mut c = alloc::vec![0.0; self.n];
        let mut rate = alloc::vec![0.0; self.n];
        let mut t = 0.0;
        let mut steps = 0;
        let crit = p.breakthrough_concentration;
        while t < stop {
            let dt = self.dt.min(horizon - t);
            let before = c[self.monitor];
            self.step(&mut c, &mut rate, dt);
            let after = c[self.monitor];
            if after >= crit {
                let frac = if after > before { (crit - before) / (after - before) } else { 1.0 };
                let tb = t + frac.clamp(0.0, 1.0) * dt;
                return Ok(QoiResult::exact(tb / SECONDS_PER_DAY));
            }
            if !after.is_finite() {
                return Err(Error::NonFinite);
            }
            t += dt;
            steps += 1;
            if steps >= p.max_steps && t < stop {
                return Err(Error::MaxStepsExceeded { max_steps: p.max_steps });
            }
        }
        Ok(censored)
    }
}

/// Breakthrough time in days at the middle of the right edge.
pub fn qoi_breakthrough_2d(
    grid: &Grid2D,
    log_transmissivity: &[f64],
    params: &TransportParams,
    limit_days: Option<f64>,
) -> Result<QoiResult> {
    TransportModel::new(grid, log_transmissivity, params)?.breakthrough(limit_days)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{abs, ln};

    fn grid() -> Grid2D {
        Grid2D::new(13, 13, 250.0, 250.0, 5.0).unwrap()
    }

    fn wavy_field(g: &Grid2D, amp: f64) -> Vec<f64> {
        (0..g.len())
            .map(|k| {
                let (i, j) = ((k % g.nx) as f64, (k / g.nx) as f64);
                ln(5e-5) + amp * crate::math::cos(0.9 * i + 1.7 * j)
            })
            .collect()
    }

    #[test]
    fn concentration_stays_bounded_and_mass_is_conserved() {
        let g = grid();
        let field = wavy_field(&g, 2.5);
        let params = TransportParams::default();
        let model = TransportModel::new(&g, &field, &params).unwrap();
        let mut c = alloc::vec![0.0; g.len()];
        let mut rate = alloc::vec![0.0; g.len()];
        for _ in 0..400 {
            let before = model.mass(&c);
            let inflow = model.step(&mut c, &mut rate, model.dt());
            let after = model.mass(&c);
            let scale = abs(inflow).max(1e-300);
            assert!(abs(after - before - inflow) <= 1e-6 * scale);
            for v in &c {
                assert!(*v >= -1e-12 && *v <= 1.0 + 1e-12, "{v}");
            }
        }
    }

    #[test]
    fn impermeable_field_is_censored() {
        let g = grid();
        let field = alloc::vec![ln(5e-5) - 20.0; g.len()];
        let r = qoi_breakthrough_2d(&g, &field, &TransportParams::default(), None).unwrap();
        assert!(r.censored);
        assert_eq!(r.value, 3500.0);
    }

    #[test]
    fn higher_transmissivity_never_delays_breakthrough() {
        let g = grid();
        let params = TransportParams::default();
        let base = ln(5e-5) + 4.0;
        let slow = qoi_breakthrough_2d(&g, &alloc::vec![base; g.len()], &params, None).unwrap();
        let fast = qoi_breakthrough_2d(&g, &alloc::vec![base + 1.0; g.len()], &params, None).unwrap();
        assert!(!fast.censored);
        assert!(fast.value <= slow.value);
    }

    #[test]
    fn limit_stops_early_without_changing_classification() {
        let g = grid();
        let params = TransportParams::default();
        let field = alloc::vec![ln(5e-5) + 4.0; g.len()];
        let full = qoi_breakthrough_2d(&g, &field, &params, None).unwrap();
        assert!(!full.censored);
        let above = qoi_breakthrough_2d(&g, &field, &params, Some(full.value + 1.0)).unwrap();
        assert_eq!(above, full);
        let below = qoi_breakthrough_2d(&g, &field, &params, Some(full.value * 0.5)).unwrap();
        assert!(below.censored && below.value > full.value * 0.5);
    }

    #[test]
    fn max_steps_is_enforced() {
        let g = grid();
        let params = TransportParams {
            max_steps: 3,
            max_dt_days: 0.01,
            ..TransportParams::default()
        };
        let field = alloc::vec![ln(5e-5); g.len()];
        assert!(matches!(
            qoi_breakthrough_2d(&g, &field, &params, None),
            Err(Error::MaxStepsExceeded { .. })
        ));
    }

    #[test]
    fn snapshot_shows_front_entering_from_the_left() {
        let g = grid();
        let field = alloc::vec![ln(5e-5) + 3.0; g.len()];
        let model = TransportModel::new(&g, &field, &TransportParams::default()).unwrap();
        let c = model.concentration_at(200.0).unwrap();
        let row = g.ny / 2;
        assert!(c[g.index(0, row)] > c[g.index(g.nx - 1, row)]);
        assert!(c[g.index(0, row)] > 0.5);
    }
}
