//! Bounds near the boundary for constant data, and a sweep of the `a_j`
//! root bounds.

use super::{constant_phi, solve_aj, SpectralCoeffs};
use crate::error::{domain, Result};
use crate::table::Table;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `f(1, y) n^2 / y` on the rectangle of width `floor(a n)`.
    Corner,
    /// `f(n, y) n / y` on the strip.
    Strip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub n: usize,
    /// Rectangle width; `None` for the strip.
    pub width: Option<usize>,
    pub max_ratio: f64,
    pub argmax_y: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub kind: BoundKind,
    pub a_ratio: f64,
    pub rows: Vec<BoundaryRow>,
    /// Largest ratio over all rows.
    pub constant: f64,
    /// Largest over smallest per-row maximum.
    pub spread: f64,
}

impl BoundaryReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "width", "max_ratio", "argmax_y"]);
        for r in &self.rows {
            t.push(crate::row![
                r.n,
                r.width.map(|w| w as i64).unwrap_or(-1),
                r.max_ratio,
                r.argmax_y
            ]);
        }
        t
    }
}

/// For constant data 1, the largest of `f(1,y) n^2 / y` (corner) or
/// `f(n,y) n / y` (strip) over `y = 1..n-1`, for each `n`.
pub fn boundary_bound_report(
    kind: BoundKind,
    a_ratio: f64,
    n_list: &[usize],
) -> Result<BoundaryReport> {
    if n_list.is_empty() {
        return Err(domain("empty n list"));
    }
    if kind == BoundKind::Corner && !(a_ratio > 0.0 && a_ratio.is_finite()) {
        return Err(domain(format!("a_ratio = {a_ratio} must be positive")));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let coeffs = SpectralCoeffs::new(&constant_phi(n, 1.0), n)?;
        let nf = n as f64;
        let (width, eval): (Option<usize>, Box<dyn Fn(usize) -> f64>) = match kind {
            BoundKind::Corner => {
                let l = (a_ratio * nf).floor() as usize;
                if l < 2 {
                    return Err(domain(format!("width floor({a_ratio} * {n}) below 2")));
                }
                let c = &coeffs;
                (
                    Some(l),
                    Box::new(move |y| c.rectangle_value(l, 1, y) * nf * nf / y as f64),
                )
            }
            BoundKind::Strip => {
                let c = &coeffs;
                (
                    None,
                    Box::new(move |y| c.strip_value(nf, y) * nf / y as f64),
                )
            }
        };
        let (argmax_y, max_ratio) = (1..n)
            .map(|y| (y, eval(y)))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        rows.push(BoundaryRow {
            n,
            width,
            max_ratio,
            argmax_y,
        });
    }
    let constant = rows
        .iter()
        .map(|r| r.max_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = rows
        .iter()
        .map(|r| r.max_ratio)
        .fold(f64::INFINITY, f64::min);
    Ok(BoundaryReport {
        kind,
        a_ratio,
        rows,
        constant,
        spread: constant / floor,
    })
}

/// Outcome of sweeping every `a_j` for `2 <= n <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AjBoundSummary {
    pub n_max: usize,
    pub roots: u64,
    /// `|cosh(a_j) - (2 - cos(pi j / n))|`, worst case.
    pub max_residual: f64,
    /// Violations of `j/(2n) <= a_j <= pi j / n`.
    pub violations: u64,
    /// Violations of the sharper lower bound `pi j / (2n) <= a_j`.
    pub sharp_violations: u64,
}

pub fn aj_bound_check(n_max: usize) -> Result<AjBoundSummary> {
    let mut s = AjBoundSummary {
        n_max,
        roots: 0,
        max_residual: 0.0,
        violations: 0,
        sharp_violations: 0,
    };
    for n in 2..=n_max {
        let nf = n as f64;
        for j in 1..n {
            let a = solve_aj(n, j)?;
            let theta = PI * j as f64 / nf;
            let c = 2.0 - theta.cos();
            s.max_residual = s.max_residual.max((a.cosh() - c).abs());
            if !(j as f64 / (2.0 * nf) <= a && a <= theta) {
                s.violations += 1;
            }
            if a < theta / 2.0 {
                s.sharp_violations += 1;
            }
            s.roots += 1;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_ratio_finite_including_top_row() {
        let r = boundary_bound_report(BoundKind::Strip, 0.0, &[16]).unwrap();
        assert!(r.constant.is_finite() && r.constant > 0.0);
        // Direct evaluation at y = n - 1 stays below the reported maximum.
        let c = SpectralCoeffs::new(&constant_phi(16, 1.0), 16).unwrap();
        assert!(c.strip_value(16.0, 15) * 16.0 / 15.0 <= r.constant);
    }

    #[test]
    fn corner_constant_stable() {
        let r = boundary_bound_report(BoundKind::Corner, 1.0, &[16, 32, 64, 128]).unwrap();
        assert!(r.spread <= 1.25, "spread {}", r.spread);
        assert_eq!(r.rows[0].width, Some(16));
        assert!(boundary_bound_report(BoundKind::Corner, 0.05, &[16]).is_err());
        assert!(boundary_bound_report(BoundKind::Corner, -1.0, &[16]).is_err());
    }

    #[test]
    fn aj_sweep() {
        let s = aj_bound_check(300).unwrap();
        assert_eq!(s.violations, 0);
        assert!(s.max_residual <= 1e-13);
        assert_eq!(s.roots, (2..=300u64).map(|n| n - 1).sum::<u64>());
    }
}
