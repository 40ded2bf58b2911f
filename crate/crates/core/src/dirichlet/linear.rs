//! Direct solve of the five-point Laplace system by banded Cholesky.
//!
//! Unknowns are the interior values of `{0..=width} x {0..=n}`. They are
//! numbered along the shorter side first so the bandwidth is
//! `min(width, n) - 1`. The matrix `4 I - adjacency` is symmetric positive
//! definite, so the factorization needs no pivoting.

use super::{Grid, RectangleSpec, Region};
use crate::error::{domain, Result};

/// Cholesky factor of the Laplace system on one grid size, reusable for
/// any boundary data on the two vertical sides.
#[derive(Debug, Clone)]
pub struct LaplaceFactor {
    width: usize,
    n: usize,
    /// Inner (fast) index runs over y when true.
    inner_is_y: bool,
    /// Inner length; also the bandwidth.
    m: usize,
    size: usize,
    /// Row `i` holds `L[i][i-m..=i]` at offsets `0..=m`.
    band: Vec<f64>,
}

impl LaplaceFactor {
    pub fn new(width: usize, n: usize) -> Result<Self> {
        if width < 2 || n < 2 {
            return Err(domain(format!(
                "need width, n >= 2, got width = {width}, n = {n}"
            )));
        }
        let inner_is_y = n <= width;
        let m = if inner_is_y { n - 1 } else { width - 1 };
        let size = (width - 1) * (n - 1);
        let w = m + 1;
        let mut band = vec![0.0; size * w];
        let entry = |i: usize, c: usize| -> f64 {
            if c == i {
                4.0
            } else if c + m == i || (c + 1 == i && i % m != 0) {
                -1.0
            } else {
                0.0
            }
        };
        for i in 0..size {
            let lo = i.saturating_sub(m);
            for c in lo..=i {
                let mut s = entry(i, c);
                let klo = lo.max(c.saturating_sub(m));
                let ri = i * w + m - i;
                let rc = c * w + m - c;
                for k in klo..c {
                    s -= band[ri + k] * band[rc + k];
                }
                if c == i {
                    band[ri + i] = s.sqrt();
                } else {
                    band[ri + c] = s / band[rc + c];
                }
            }
        }
        Ok(Self {
            width,
            n,
            inner_is_y,
            m,
            size,
            band,
        })
    }

    #[inline]
    fn index(&self, x: usize, y: usize) -> usize {
        if self.inner_is_y {
            (x - 1) * self.m + (y - 1)
        } else {
            (y - 1) * self.m + (x - 1)
        }
    }

    #[inline]
    fn l(&self, i: usize, c: usize) -> f64 {
        self.band[i * (self.m + 1) + self.m + c - i]
    }

    /// Solves with `left` on `x = 0` and `right` on `x = width` (heights
    /// `1..n-1`), zero on the horizontal sides.
    pub fn solve(&self, left: &[f64], right: &[f64]) -> Result<Grid> {
        let (width, n) = (self.width, self.n);
        for side in [left, right] {
            if side.len() != n - 1 {
                return Err(crate::Error::Shape {
                    expected: n - 1,
                    found: side.len(),
                });
            }
        }
        let mut rhs = vec![0.0; self.size];
        for y in 1..n {
            rhs[self.index(1, y)] += left[y - 1];
            rhs[self.index(width - 1, y)] += right[y - 1];
        }
        // L z = rhs, then L^T u = z.
        let m = self.m;
        for i in 0..self.size {
            let mut s = rhs[i];
            for k in i.saturating_sub(m)..i {
                s -= self.l(i, k) * rhs[k];
            }
            rhs[i] = s / self.l(i, i);
        }
        for i in (0..self.size).rev() {
            let mut s = rhs[i];
            for r in i + 1..(i + m + 1).min(self.size) {
                s -= self.l(r, i) * rhs[r];
            }
            rhs[i] = s / self.l(i, i);
        }
        let mut grid = Grid::zeros(width, n);
        for y in 1..n {
            grid.set(0, y, left[y - 1]);
            grid.set(width, y, right[y - 1]);
            for x in 1..width {
                grid.set(x, y, rhs[self.index(x, y)]);
            }
        }
        Ok(grid)
    }
}

/// Direct solve of the problem. Strips need a truncation column `x_max >= 2`
/// where the solution is set to zero.
pub fn oracle_linear_solve(spec: &RectangleSpec, truncation: Option<usize>) -> Result<Grid> {
    let zeros = vec![0.0; spec.n - 1];
    match spec.region {
        Region::Rectangle { l } => LaplaceFactor::new(l, spec.n)?.solve(&zeros, &spec.phi),
        Region::Strip => {
            let x_max = truncation.ok_or_else(|| domain("strip solve needs a truncation"))?;
            if x_max < 2 {
                return Err(domain(format!("truncation {x_max} must be at least 2")));
            }
            LaplaceFactor::new(x_max, spec.n)?.solve(&spec.phi, &zeros)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{constant_phi, solve_strip};
    use super::*;

    #[test]
    fn one_by_one() {
        let spec = RectangleSpec::rectangle(2, 2, vec![1.0]).unwrap();
        let g = oracle_linear_solve(&spec, None).unwrap();
        assert_eq!(g.get(1, 1), 0.25);
    }

    #[test]
    fn residual_small_both_orientations() {
        for (w, n) in [(3, 9), (9, 3), (17, 17), (2, 30), (30, 2)] {
            let f = LaplaceFactor::new(w, n).unwrap();
            let left: Vec<f64> = (1..n).map(|y| (y as f64).sin()).collect();
            let right: Vec<f64> = (1..n).map(|y| (y as f64 * 0.3).cos()).collect();
            let g = f.solve(&left, &right).unwrap();
            assert!(g.max_residual() <= 1e-12, "{w}x{n}: {}", g.max_residual());
        }
    }

    #[test]
    fn truncation_errors() {
        let spec = RectangleSpec::strip(4, constant_phi(4, 1.0)).unwrap();
        assert!(oracle_linear_solve(&spec, Some(1)).is_err());
        assert!(oracle_linear_solve(&spec, None).is_err());
    }

    #[test]
    fn strip_truncation_converges() {
        let spec = RectangleSpec::strip(4, vec![0.3, 1.0, 0.6]).unwrap();
        let a = oracle_linear_solve(&spec, Some(40)).unwrap();
        let b = oracle_linear_solve(&spec, Some(80)).unwrap();
        assert!(a.max_abs_diff_upto(&b, 10) <= 1e-8);
        let s = solve_strip(&spec).unwrap();
        for x in 0..=10 {
            for y in 0..=4 {
                assert!((s.value(x, y).unwrap() - b.get(x, y)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn thin_strip_matches_exponential() {
        let spec = RectangleSpec::strip(2, vec![1.0]).unwrap();
        let g = oracle_linear_solve(&spec, Some(40)).unwrap();
        assert!((g.get(1, 1) - 1.0 / (2.0 + 3f64.sqrt())).abs() < 1e-12);
    }
}
