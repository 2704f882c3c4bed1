use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::math::sqrt;

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    check_len(n, lower.len())?;
    check_len(n, upper.len())?;
    check_len(n, rhs.len())?;
    let mut c = alloc::vec![0.0; n];
    let mut d = alloc::vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Symmetric positive definite band matrix with half-bandwidth `bw`,
/// storing the lower band row by row.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: alloc::vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw - (i - j))
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    /// In-place band Cholesky `A = L Lᵀ` followed by a solve.
    pub fn solve(mut self, rhs: &mut [f64]) -> Result<()> {
        check_len(self.n, rhs.len())?;
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut sum = self.data[self.slot(i, j)];
                for k in k0..j {
                    sum -= self.data[self.slot(i, k)] * self.data[self.slot(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::SingularSystem { row: i });
                    }
                    let s = self.slot(i, i);
                    self.data[s] = sqrt(sum);
                } else {
                    let s = self.slot(i, j);
                    self.data[s] = sum / self.data[self.slot(j, j)];
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut sum = rhs[i];
            for j in j0..i {
                sum -= self.data[self.slot(i, j)] * rhs[j];
            }
            rhs[i] = sum / self.data[self.slot(i, i)];
        }
        for i in (0..n).rev() {
            let mut sum = rhs[i];
            for k in (i + 1)..n.min(i + bw + 1) {
                sum -= self.data[self.slot(k, i)] * rhs[k];
            }
            rhs[i] = sum / self.data[self.slot(i, i)];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;

    #[test]
    fn tridiagonal_matches_known_solution() {
        // -x[i-1] + 2 x[i] - x[i+1] with x = (1, 2, 3, 4)
        let x = [1.0, 2.0, 3.0, 4.0];
        let rhs = [0.0, 0.0, 0.0, 5.0];
        let sol = solve_tridiagonal(&[0.0, -1.0, -1.0, -1.0], &[2.0; 4], &[-1.0, -1.0, -1.0, 0.0], &rhs).unwrap();
        for (a, b) in sol.iter().zip(x) {
            assert!(abs(a - b) < 1e-12);
        }
    }

    #[test]
    fn band_cholesky_matches_dense() {
        // 2-D Laplacian-like 3x3 grid, bw = 3
        let nx = 3;
        let n = 9;
        let mut a = BandedSpd::zeros(n, nx);
        let mut dense = [[0.0f64; 9]; 9];
        for j in 0..3 {
            for i in 0..3 {
                let p = j * nx + i;
                a.add(p, p, 4.5);
                dense[p][p] += 4.5;
                if i + 1 < 3 {
                    a.add(p + 1, p, -1.0);
                    dense[p][p + 1] -= 1.0;
                    dense[p + 1][p] -= 1.0;
                }
                if j + 1 < 3 {
                    a.add(p + nx, p, -1.0);
                    dense[p][p + nx] -= 1.0;
                    dense[p + nx][p] -= 1.0;
                }
            }
        }
        let x: [f64; 9] = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5, -1.0, 2.0, 0.25];
        let mut b: [f64; 9] = [0.0; 9];
        for r in 0..9 {
            b[r] = (0..9).map(|c| dense[r][c] * x[c]).sum();
        }
        assert_eq!(a.get(3, 0), -1.0);
        a.solve(&mut b).unwrap();
        for (u, v) in b.iter().zip(x) {
            assert!(abs(u - v) < 1e-12);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let mut a = BandedSpd::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(matches!(a.solve(&mut [1.0, 1.0]), Err(Error::SingularSystem { .. })));
    }
}
