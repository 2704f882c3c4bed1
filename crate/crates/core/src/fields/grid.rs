use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::floor;

/// Anything whose cells have planar center coordinates.
pub trait CellCenters {
    fn n_cells(&self) -> usize;
    /// Cell centers as `(x, y)`; 1-D grids report `y = 0`.
    fn centers(&self) -> Vec<(f64, f64)>;
}

/// Uniform cell-centered grid on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_cells: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::invalid("Grid1D needs at least two cells"));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("Grid1D length must be positive"));
        }
        Ok(Self { n_cells, length })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cell_width(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        let h = self.cell_width();
        (0..self.n_cells).map(|i| (i as f64 + 0.5) * h).collect()
    }

    /// Index of the cell containing `x`, with the right endpoint mapped to
    /// the last cell.
    pub fn cell_containing(&self, x: f64) -> Option<usize> {
        if !(0.0..=self.length).contains(&x) {
            return None;
        }
        let i = floor(x / self.cell_width()) as usize;
        Some(i.min(self.n_cells - 1))
    }
}

impl CellCenters for Grid1D {
    fn n_cells(&self) -> usize {
        self.n_cells
    }

    fn centers(&self) -> Vec<(f64, f64)> {
        self.cell_centers().into_iter().map(|x| (x, 0.0)).collect()
    }
}

/// Uniform 2-D grid of `nx × ny` cells, stored row-major with `x` varying
/// fastest (`index = j * nx + i`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Aquifer thickness in meters. Informational for flow (the field is a
    /// transmissivity); used for pore volumes in transport.
    pub thickness: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, length_x: f64, length_y: f64, thickness: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid("Grid2D needs at least 2x2 cells"));
        }
        if !(length_x > 0.0 && length_y > 0.0 && thickness > 0.0) {
            return Err(Error::invalid("Grid2D extents must be positive"));
        }
        Ok(Self {
            nx,
            ny,
            dx: length_x / nx as f64,
            dy: length_y / ny as f64,
            thickness,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn length_x(&self) -> f64 {
        self.dx * self.nx as f64
    }

    pub fn length_y(&self) -> f64 {
        self.dy * self.ny as f64
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }
}

impl CellCenters for Grid2D {
    fn n_cells(&self) -> usize {
        self.len()
    }

    fn centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(self.center(i, j));
            }
        }
        out
    }
}
