//! The discrete Dirichlet problem on the rectangle `{0..=l} x {0..=n}` with
//! data on the side `x = l`, and on the half-infinite strip `x >= 0`,
//! `0 <= y <= n` with data on `x = 0`.
//!
//! Both are solved in closed form by expanding the boundary data in the
//! discrete sine basis `sin(pi y j / n)`, `j = 1..n-1`. Mode `j` decays in
//! `x` at the rate `a_j`, the positive root of `cosh(a) = 2 - cos(pi j / n)`.
//! Two oracles check the closed forms: a banded Cholesky solve of the
//! linear system ([`oracle_linear_solve`]) and walks run to exit
//! ([`oracle_hitting_mc`]).

mod bounds;
mod hitting;
mod linear;

pub use bounds::{
    aj_bound_check, boundary_bound_report, AjBoundSummary, BoundKind, BoundaryReport, BoundaryRow,
};
pub use hitting::{oracle_hitting_mc, HittingEstimate, MC_STEP_CAP};
pub use linear::{oracle_linear_solve, LaplaceFactor};

use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

/// Which region the problem lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `0 <= x <= l`, data on `x = l`.
    Rectangle { l: usize },
    /// `x >= 0`, data on `x = 0`.
    Strip,
}

/// Side of the domain that carries the boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiSide {
    /// `x = 0`.
    Left,
    /// `x = l`.
    Right,
}

/// Domain and boundary data of one problem. `phi[y - 1]` is the value at
/// height `y`, for `y = 1..n-1`; every other boundary point carries zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RectangleSpec {
    pub region: Region,
    pub n: usize,
    pub phi: Vec<f64>,
}

impl RectangleSpec {
    pub fn rectangle(l: usize, n: usize, phi: Vec<f64>) -> Result<Self> {
        if l < 2 {
            return Err(domain(format!("width l = {l} must be at least 2")));
        }
        Self::checked(Region::Rectangle { l }, n, phi)
    }

    pub fn strip(n: usize, phi: Vec<f64>) -> Result<Self> {
        Self::checked(Region::Strip, n, phi)
    }

    fn checked(region: Region, n: usize, phi: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("height n = {n} must be at least 2")));
        }
        if phi.len() != n - 1 {
            return Err(Error::Shape {
                expected: n - 1,
                found: phi.len(),
            });
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(domain("boundary data must be finite"));
        }
        Ok(Self { region, n, phi })
    }

    /// Width `l` of a rectangle; `None` for a strip.
    pub fn width(&self) -> Option<usize> {
        match self.region {
            Region::Rectangle { l } => Some(l),
            Region::Strip => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.region == Region::Strip
    }

    pub fn side(&self) -> PhiSide {
        match self.region {
            Region::Rectangle { .. } => PhiSide::Right,
            Region::Strip => PhiSide::Left,
        }
    }

    /// True for points with `1 <= x <= l-1` (or `x >= 1`) and `1 <= y <= n-1`.
    pub fn is_interior(&self, x: i64, y: i64) -> bool {
        let in_y = y >= 1 && y < self.n as i64;
        in_y && match self.region {
            Region::Rectangle { l } => x >= 1 && x < l as i64,
            Region::Strip => x >= 1,
        }
    }

    /// Value prescribed at a boundary point; `None` if `(x, y)` is not a
    /// boundary point. Corners are not boundary points: no walk reaches them.
    pub fn boundary_value(&self, x: i64, y: i64) -> Option<f64> {
        let n = self.n as i64;
        let x_max = match self.region {
            Region::Rectangle { l } => l as i64,
            Region::Strip => i64::MAX,
        };
        let inner_y = y >= 1 && y < n;
        let inner_x = x >= 1 && x < x_max;
        if inner_y && (x == 0 || x == x_max) {
            let on_phi = match self.side() {
                PhiSide::Left => x == 0,
                PhiSide::Right => x == x_max,
            };
            Some(if on_phi {
                self.phi[(y - 1) as usize]
            } else {
                0.0
            })
        } else if inner_x && (y == 0 || y == n) {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Constant boundary data `phi = v` on heights `1..n-1`.
pub fn constant_phi(n: usize, v: f64) -> Vec<f64> {
    vec![v; n.saturating_sub(1)]
}

/// `sin(pi m / n)` with exact zeros at multiples of `n`.
pub fn sin_pi_frac(m: usize, n: usize) -> f64 {
    let r = m % (2 * n);
    let (r, sign) = if r >= n { (r - n, -1.0) } else { (r, 1.0) };
    if r == 0 {
        return 0.0;
    }
    let r = r.min(n - r);
    sign * (PI * r as f64 / n as f64).sin()
}

/// Positive root of `cosh(a) = 2 - cos(pi j / n)` for `1 <= j <= n-1`.
pub fn solve_aj(n: usize, j: usize) -> Result<f64> {
    if n < 2 || j == 0 || j >= n {
        return Err(domain(format!("need 1 <= j <= n-1, got j = {j}, n = {n}")));
    }
    // c - 1 = 1 - cos(theta) = 2 sin^2(theta/2), kept small-angle accurate.
    let s = (PI * j as f64 / (2 * n) as f64).sin();
    let d = 2.0 * s * s;
    Ok((d + (d * (d + 2.0)).sqrt()).ln_1p())
}

/// Decay rates and sine coefficients of one boundary function.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    pub n: usize,
    /// `a[j - 1] = a_j`.
    pub a: Vec<f64>,
    /// `b[j - 1] = b_j`.
    pub b: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn new(phi: &[f64], n: usize) -> Result<Self> {
        let b = sine_coeffs(phi, n)?;
        let a = (1..n).map(|j| solve_aj(n, j)).collect::<Result<_>>()?;
        Ok(Self { n, a, b })
    }

    /// Rectangle solution of width `l` at `(x, y)`.
    pub fn rectangle_value(&self, l: usize, x: usize, y: usize) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (&a, &b))| b * sinh_ratio(a, x, l) * sin_pi_frac(y * (i + 1), self.n))
            .sum()
    }

    /// Strip solution at `(x, y)`.
    pub fn strip_value(&self, x: f64, y: usize) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (&a, &b))| b * (-a * x).exp() * sin_pi_frac(y * (i + 1), self.n))
            .sum()
    }
}

/// Discrete sine transform `b_j = (2/n) sum_y phi(y) sin(pi y j / n)`.
pub fn sine_coeffs(phi: &[f64], n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(domain(format!("height n = {n} must be at least 2")));
    }
    if phi.len() != n - 1 {
        return Err(Error::Shape {
            expected: n - 1,
            found: phi.len(),
        });
    }
    let scale = 2.0 / n as f64;
    Ok((1..n)
        .map(|j| {
            scale
                * phi
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| p * sin_pi_frac((i + 1) * j, n))
                    .sum::<f64>()
        })
        .collect())
}

/// `sinh(a x) / sinh(a l)` without overflow.
pub fn sinh_ratio(a: f64, x: usize, l: usize) -> f64 {
    if x == l {
        return 1.0;
    }
    let (x, l) = (x as f64, l as f64);
    (a * (x - l)).exp() * (-2.0 * a * x).exp_m1() / (-2.0 * a * l).exp_m1()
}

/// Values on the closed grid `{0..=width} x {0..=n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    n: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(width: usize, n: usize) -> Self {
        Self {
            width,
            n,
            data: vec![0.0; (width + 1) * (n + 1)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[x * (self.n + 1) + y]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[x * (self.n + 1) + y] = v;
    }

    /// Discrete Laplacian `(1/4) sum (neighbour - f)` at an interior point.
    pub fn laplacian(&self, x: usize, y: usize) -> f64 {
        0.25 * (self.get(x + 1, y) + self.get(x - 1, y) + self.get(x, y + 1) + self.get(x, y - 1))
            - self.get(x, y)
    }

    /// Largest `|laplacian|` over the interior.
    pub fn max_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 1..self.width {
            for y in 1..self.n {
                worst = worst.max(self.laplacian(x, y).abs());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Grid) -> f64 {
        assert_eq!((self.width, self.n), (other.width, other.n));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest difference over columns `x <= x_max`.
    pub fn max_abs_diff_upto(&self, other: &Grid, x_max: usize) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..=x_max.min(self.width).min(other.width) {
            for y in 0..=self.n.min(other.n) {
                worst = worst.max((self.get(x, y) - other.get(x, y)).abs());
            }
        }
        worst
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Precomputed sine and growth tables for repeated rectangle solves at one
/// `(l, n)`.
#[derive(Debug, Clone)]
pub struct SpectralRectangle {
    l: usize,
    n: usize,
    a: Vec<f64>,
    /// `sines[y * (n-1) + j-1] = sin(pi y j / n)`, `y = 0..=n`.
    sines: Vec<f64>,
    /// `ratios[x * (n-1) + j-1] = sinh(a_j x) / sinh(a_j l)`, `x = 0..=l`.
    ratios: Vec<f64>,
}

impl SpectralRectangle {
    pub fn new(l: usize, n: usize) -> Result<Self> {
        if l < 2 || n < 2 {
            return Err(domain(format!("need l, n >= 2, got l = {l}, n = {n}")));
        }
        let modes = n - 1;
        let a: Vec<f64> = (1..n).map(|j| solve_aj(n, j)).collect::<Result<_>>()?;
        let mut sines = Vec::with_capacity((n + 1) * modes);
        for y in 0..=n {
            sines.extend((1..n).map(|j| sin_pi_frac(y * j, n)));
        }
        let mut ratios = Vec::with_capacity((l + 1) * modes);
        for x in 0..=l {
            ratios.extend(a.iter().map(|&aj| sinh_ratio(aj, x, l)));
        }
        Ok(Self {
            l,
            n,
            a,
            sines,
            ratios,
        })
    }

    pub fn decay_rates(&self) -> &[f64] {
        &self.a
    }

    /// Solution grid for data `phi` on `x = l`.
    pub fn solve(&self, phi: &[f64]) -> Result<Grid> {
        let (l, n, modes) = (self.l, self.n, self.n - 1);
        if phi.len() != modes {
            return Err(Error::Shape {
                expected: modes,
                found: phi.len(),
            });
        }
        let scale = 2.0 / n as f64;
        let mut b = vec![0.0; modes];
        for (y, &p) in (1..n).zip(phi) {
            let row = &self.sines[y * modes..(y + 1) * modes];
            for (bj, s) in b.iter_mut().zip(row) {
                *bj += p * s;
            }
        }
        b.iter_mut().for_each(|v| *v *= scale);
        let mut grid = Grid::zeros(l, n);
        let mut w = vec![0.0; modes];
        for x in 1..=l {
            let ratio = &self.ratios[x * modes..(x + 1) * modes];
            for ((wj, r), bj) in w.iter_mut().zip(ratio).zip(&b) {
                *wj = r * bj;
            }
            for y in 1..n {
                let row = &self.sines[y * modes..(y + 1) * modes];
                let v: f64 = w.iter().zip(row).map(|(a, b)| a * b).sum();
                grid.set(x, y, v);
            }
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Grid(Grid),
    Lazy,
}

/// A solved problem: a stored grid for rectangles, a lazily evaluated
/// spectral sum for strips.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSolution {
    spec: RectangleSpec,
    coeffs: SpectralCoeffs,
    values: Values,
    max_residual: f64,
}

/// Columns `x = 1..=STRIP_CHECK_COLUMNS` over which a strip solution's
/// residual is recorded at construction.
pub const STRIP_CHECK_COLUMNS: usize = 16;

impl HarmonicSolution {
    pub fn spec(&self) -> &RectangleSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &SpectralCoeffs {
        &self.coeffs
    }

    /// Stored grid of a rectangle solution.
    pub fn grid(&self) -> Option<&Grid> {
        match &self.values {
            Values::Grid(g) => Some(g),
            Values::Lazy => None,
        }
    }

    /// Largest `|laplacian|` over the interior (for strips, over the first
    /// [`STRIP_CHECK_COLUMNS`] columns).
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// Value at a point of the closed domain.
    pub fn value(&self, x: usize, y: usize) -> Result<f64> {
        if y > self.spec.n {
            return Err(domain(format!("y = {y} outside 0..={}", self.spec.n)));
        }
        match (&self.values, self.spec.region) {
            (Values::Grid(g), Region::Rectangle { l }) => {
                if x > l {
                    return Err(domain(format!("x = {x} outside 0..={l}")));
                }
                Ok(g.get(x, y))
            }
            _ => Ok(self.strip_value(x, y)),
        }
    }

    fn strip_value(&self, x: usize, y: usize) -> f64 {
        if x == 0 {
            // Exact boundary data rather than the resummed series.
            return if y >= 1 && y < self.spec.n {
                self.spec.phi[y - 1]
            } else {
                0.0
            };
        }
        self.coeffs.strip_value(x as f64, y)
    }

    /// Discrete Laplacian at an interior point.
    pub fn residual_at(&self, x: usize, y: usize) -> Result<f64> {
        if !self.spec.is_interior(x as i64, y as i64) {
            return Err(domain(format!("({x}, {y}) is not interior")));
        }
        let f = |x, y| self.value(x, y);
        Ok(0.25 * (f(x + 1, y)? + f(x - 1, y)? + f(x, y + 1)? + f(x, y - 1)?) - f(x, y)?)
    }
}

/// Closed-form solution on the rectangle, data on `x = l`.
pub fn solve_rectangle(spec: &RectangleSpec) -> Result<HarmonicSolution> {
    let Region::Rectangle { l } = spec.region else {
        return Err(domain("solve_rectangle needs a finite rectangle"));
    };
    let mut grid = SpectralRectangle::new(l, spec.n)?.solve(&spec.phi)?;
    // The right column is the data itself.
    for (y, &p) in (1..spec.n).zip(&spec.phi) {
        grid.set(l, y, p);
    }
    let max_residual = grid.max_residual();
    Ok(HarmonicSolution {
        spec: spec.clone(),
        coeffs: SpectralCoeffs::new(&spec.phi, spec.n)?,
        values: Values::Grid(grid),
        max_residual,
    })
}

/// Bounded closed-form solution on the strip, data on `x = 0`.
pub fn solve_strip(spec: &RectangleSpec) -> Result<HarmonicSolution> {
    if spec.region != Region::Strip {
        return Err(domain("solve_strip needs a strip"));
    }
    let mut sol = HarmonicSolution {
        spec: spec.clone(),
        coeffs: SpectralCoeffs::new(&spec.phi, spec.n)?,
        values: Values::Lazy,
        max_residual: 0.0,
    };
    let mut worst = 0.0f64;
    for x in 1..=STRIP_CHECK_COLUMNS {
        for y in 1..spec.n {
            worst = worst.max(sol.residual_at(x, y)?.abs());
        }
    }
    sol.max_residual = worst;
    Ok(sol)
}

/// Dispatches on the region.
pub fn solve(spec: &RectangleSpec) -> Result<HarmonicSolution> {
    match spec.region {
        Region::Rectangle { .. } => solve_rectangle(spec),
        Region::Strip => solve_strip(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{make_stream, StreamKey};
    use proptest::prelude::*;

    #[test]
    fn aj_examples() {
        let a = solve_aj(2, 1).unwrap();
        assert!((a - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-15);
        assert!((a.cosh() - 2.0).abs() < 1e-13);
        let a = solve_aj(10, 1).unwrap();
        assert!((a - 0.311607).abs() < 1e-6, "{a}");
        assert!(1.0 / 20.0 <= a && a <= PI / 10.0);
        let a = solve_aj(10, 9).unwrap();
        assert!((0.45..=PI).contains(&a));
        assert!(solve_aj(10, 0).is_err());
        assert!(solve_aj(10, 10).is_err());
        assert!(solve_aj(1, 1).is_err());
    }

    #[test]
    fn aj_residual_and_bounds() {
        for n in 2..=400usize {
            for j in 1..n {
                let a = solve_aj(n, j).unwrap();
                let c = 2.0 - (PI * j as f64 / n as f64).cos();
                assert!((a.cosh() - c).abs() <= 1e-13, "n={n} j={j}");
                let (jf, nf) = (j as f64, n as f64);
                assert!(jf / (2.0 * nf) <= a && a <= PI * jf / nf);
            }
        }
    }

    #[test]
    fn sine_examples() {
        assert_eq!(sine_coeffs(&[1.0], 2).unwrap(), vec![1.0]);
        assert!(sine_coeffs(&[0.0; 7], 8).unwrap().iter().all(|&b| b == 0.0));
        assert!(matches!(
            sine_coeffs(&[1.0; 3], 8),
            Err(Error::Shape {
                expected: 7,
                found: 3
            })
        ));
        let n = 2000;
        let b = sine_coeffs(&constant_phi(n, 1.0), n).unwrap();
        for j in 1..50 {
            let target = if j % 2 == 1 {
                4.0 / (PI * j as f64)
            } else {
                0.0
            };
            assert!((b[j - 1] - target).abs() <= 2.0 / n as f64, "j={j}");
        }
    }

    #[test]
    fn sine_transform_inverts() {
        // Synthesis with the same basis returns the data: the 2/n scale.
        for n in [2usize, 3, 5, 16, 33] {
            let phi: Vec<f64> = (1..n).map(|y| (y as f64 * 0.7).sin() + 0.3).collect();
            let b = sine_coeffs(&phi, n).unwrap();
            for y in 1..n {
                let v: f64 = (1..n).map(|j| b[j - 1] * sin_pi_frac(y * j, n)).sum();
                assert!((v - phi[y - 1]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn single_interior_point() {
        let spec = RectangleSpec::rectangle(2, 2, vec![1.0]).unwrap();
        let sol = solve_rectangle(&spec).unwrap();
        assert!((sol.value(1, 1).unwrap() - 0.25).abs() <= f64::EPSILON);
        let strip = solve_strip(&RectangleSpec::strip(2, vec![1.0]).unwrap()).unwrap();
        let exact = 1.0 / (2.0 + 3f64.sqrt());
        assert!((strip.value(1, 1).unwrap() - exact).abs() < 1e-12);
        let a = (2.0 + 3f64.sqrt()).ln();
        for x in 0..30 {
            let v = strip.value(x, 1).unwrap();
            assert!((v - (-a * x as f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_data_zero_solution() {
        let sol = solve_rectangle(&RectangleSpec::rectangle(6, 5, vec![0.0; 4]).unwrap()).unwrap();
        assert_eq!(sol.grid().unwrap().max(), 0.0);
        assert_eq!(sol.grid().unwrap().min(), 0.0);
        let s = solve_strip(&RectangleSpec::strip(5, vec![0.0; 4]).unwrap()).unwrap();
        assert_eq!(s.value(3, 2).unwrap(), 0.0);
    }

    #[test]
    fn strip_decays() {
        let s = solve_strip(&RectangleSpec::strip(8, constant_phi(8, 1.0)).unwrap()).unwrap();
        for y in 0..=8 {
            assert!(s.value(50, y).unwrap() <= 1e-5);
        }
        assert!(s.max_residual() <= 1e-10);
    }

    #[test]
    fn matches_linear_oracle_8x8() {
        let mut g = make_stream(StreamKey::new(42, 0));
        let phi: Vec<f64> = (0..7).map(|_| g.uniform01()).collect();
        let spec = RectangleSpec::rectangle(8, 8, phi).unwrap();
        let sol = solve_rectangle(&spec).unwrap();
        let oracle = oracle_linear_solve(&spec, None).unwrap();
        assert!(sol.grid().unwrap().max_abs_diff(&oracle) <= 1e-9);
    }

    #[test]
    fn huge_width_does_not_overflow() {
        let spec = RectangleSpec::rectangle(5000, 4, constant_phi(4, 1.0)).unwrap();
        let sol = solve_rectangle(&spec).unwrap();
        let g = sol.grid().unwrap();
        assert!(g.get(4999, 2).is_finite() && g.get(1, 2) >= 0.0);
        assert!(sol.max_residual() <= 1e-10);
    }

    #[test]
    fn boundary_points() {
        let spec = RectangleSpec::rectangle(4, 3, vec![0.5, 0.7]).unwrap();
        assert_eq!(spec.boundary_value(4, 2), Some(0.7));
        assert_eq!(spec.boundary_value(0, 1), Some(0.0));
        assert_eq!(spec.boundary_value(2, 0), Some(0.0));
        assert_eq!(spec.boundary_value(0, 0), None);
        assert_eq!(spec.boundary_value(2, 1), None);
        assert!(spec.is_interior(3, 2) && !spec.is_interior(4, 2));
        let strip = RectangleSpec::strip(3, vec![0.5, 0.7]).unwrap();
        assert_eq!(strip.boundary_value(0, 1), Some(0.5));
        assert_eq!(strip.boundary_value(100, 3), Some(0.0));
        assert!(RectangleSpec::rectangle(1, 3, vec![0.0; 2]).is_err());
        assert!(RectangleSpec::rectangle(3, 3, vec![0.0; 3]).is_err());
    }

    fn check_invariants(sol: &HarmonicSolution) {
        let spec = sol.spec();
        assert!(
            sol.max_residual() <= 1e-10,
            "residual {}",
            sol.max_residual()
        );
        let lo = spec.phi.iter().copied().fold(0.0, f64::min);
        let hi = spec.phi.iter().copied().fold(0.0, f64::max);
        let n = spec.n;
        let cols = spec.width().unwrap_or(STRIP_CHECK_COLUMNS);
        for x in 0..=cols {
            for y in 0..=n {
                let v = sol.value(x, y).unwrap();
                assert!(lo - 1e-10 <= v && v <= hi + 1e-10);
                if let Some(b) = spec.boundary_value(x as i64, y as i64) {
                    assert!((v - b).abs() <= 1e-10);
                }
                if y == 0 || y == n {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rectangle_invariants(l in 2usize..24, n in 2usize..24, seed in any::<u64>(), signed in any::<bool>()) {
            let mut g = make_stream(StreamKey::new(seed, 0));
            let phi: Vec<f64> = (1..n).map(|_| if signed { 2.0 * g.uniform01() - 1.0 } else { g.uniform01() }).collect();
            let spec = RectangleSpec::rectangle(l, n, phi).unwrap();
            check_invariants(&solve_rectangle(&spec).unwrap());
        }

        #[test]
        fn strip_invariants(n in 2usize..24, seed in any::<u64>()) {
            let mut g = make_stream(StreamKey::new(seed, 1));
            let phi: Vec<f64> = (1..n).map(|_| 2.0 * g.uniform01() - 1.0).collect();
            let spec = RectangleSpec::strip(n, phi).unwrap();
            check_invariants(&solve_strip(&spec).unwrap());
        }
    }
}
