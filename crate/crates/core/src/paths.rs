//! Simple random walk and Brownian paths.
//!
//! Lattice paths extend to real times by linear interpolation between the
//! surrounding integer times. Wiener paths live on a uniform grid and are
//! interpolated the same way; the grid spacing is the accuracy knob.

use std::io::{self, Write};

use crate::error::{domain, Error, Result};
use crate::rng::Generator;
use crate::table::format_real;

/// Spatial dimension of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn from_int(d: u32) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(domain(format!("dimension must be 1 or 2, got {d}"))),
        }
    }

    pub fn count(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !(0.0..=horizon).contains(&t) {
        return Err(domain(format!("time {t} outside [0, {horizon}]")));
    }
    Ok(())
}

fn check_window(t0: f64, t1: f64, horizon: f64) -> Result<()> {
    if t0.is_nan() || t1.is_nan() || t0 > t1 {
        return Err(domain(format!("empty window [{t0}, {t1}]")));
    }
    check_time(t0, horizon)?;
    check_time(t1, horizon)
}

/// Splits `t` into an integer part and a fractional offset, clamping the
/// right endpoint onto the last segment.
fn segment(t: f64, last: usize) -> (usize, f64) {
    let k = (t.floor() as usize).min(last.saturating_sub(1));
    (k, t - k as f64)
}

/// One-dimensional simple random walk started at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath1D {
    positions: Vec<i64>,
}

impl LatticePath1D {
    /// Builds a path from its positions, checking the ±1 increments.
    pub fn from_positions(positions: Vec<i64>) -> Result<Self> {
        if positions.first() != Some(&0) {
            return Err(Error::Invalid("walk must start at 0".into()));
        }
        if positions.windows(2).any(|w| (w[1] - w[0]).abs() != 1) {
            return Err(Error::Invalid("walk increments must be +-1".into()));
        }
        Ok(Self { positions })
    }

    pub fn from_steps(steps: &[i64]) -> Result<Self> {
        let mut positions = Vec::with_capacity(steps.len() + 1);
        positions.push(0);
        let mut s = 0;
        for &x in steps {
            s += x;
            positions.push(s);
        }
        Self::from_positions(positions)
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn steps(&self) -> impl Iterator<Item = i64> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    /// `S([t]) + (t - [t]) (S([t]+1) - S([t]))`.
    pub fn interpolate(&self, t: f64) -> Result<f64> {
        check_time(t, self.len() as f64)?;
        if self.is_empty() {
            return Ok(0.0);
        }
        let (k, frac) = segment(t, self.len());
        let a = self.positions[k] as f64;
        let b = self.positions[k + 1] as f64;
        Ok(a + frac * (b - a))
    }

    /// Largest `|S(t)|` over `t` in the window. Linear pieces attain their
    /// extremes at endpoints, so integer times plus the window ends suffice.
    pub fn sup_norm(&self, t0: f64, t1: f64) -> Result<f64> {
        check_window(t0, t1, self.len() as f64)?;
        let mut best = self.interpolate(t0)?.abs().max(self.interpolate(t1)?.abs());
        let first = t0.ceil() as usize;
        let last = t1.floor() as usize;
        for k in first..=last.min(self.len()) {
            best = best.max(self.positions[k].abs() as f64);
        }
        Ok(best)
    }
}

/// Planar simple random walk started at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath2D {
    positions: Vec<[i64; 2]>,
}

impl LatticePath2D {
    pub fn from_positions(positions: Vec<[i64; 2]>) -> Result<Self> {
        if positions.first() != Some(&[0, 0]) {
            return Err(Error::Invalid("walk must start at the origin".into()));
        }
        let bad = positions.windows(2).any(|w| {
            let dx = (w[1][0] - w[0][0]).abs();
            let dy = (w[1][1] - w[0][1]).abs();
            dx + dy != 1
        });
        if bad {
            return Err(Error::Invalid(
                "walk increments must be unit lattice steps".into(),
            ));
        }
        Ok(Self { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> &[[i64; 2]] {
        &self.positions
    }

    pub fn steps(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        self.positions
            .windows(2)
            .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
    }

    pub fn interpolate(&self, t: f64) -> Result<[f64; 2]> {
        check_time(t, self.len() as f64)?;
        if self.is_empty() {
            return Ok([0.0, 0.0]);
        }
        let (k, frac) = segment(t, self.len());
        let a = self.positions[k];
        let b = self.positions[k + 1];
        Ok([
            a[0] as f64 + frac * (b[0] - a[0]) as f64,
            a[1] as f64 + frac * (b[1] - a[1]) as f64,
        ])
    }

    /// Largest Euclidean norm over the window. The norm is convex along each
    /// linear piece, so it peaks at integer times or at the window ends.
    pub fn sup_norm(&self, t0: f64, t1: f64) -> Result<f64> {
        check_window(t0, t1, self.len() as f64)?;
        let norm = |p: [f64; 2]| p[0].hypot(p[1]);
        let mut best = norm(self.interpolate(t0)?).max(norm(self.interpolate(t1)?));
        let first = t0.ceil() as usize;
        let last = t1.floor() as usize;
        for k in first..=last.min(self.len()) {
            let [x, y] = self.positions[k];
            best = best.max((x as f64).hypot(y as f64));
        }
        Ok(best)
    }
}

/// A generated lattice walk of either dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticePath {
    One(LatticePath1D),
    Two(LatticePath2D),
}

impl LatticePath {
    pub fn len(&self) -> usize {
        match self {
            LatticePath::One(p) => p.len(),
            LatticePath::Two(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sup_norm(&self, t0: f64, t1: f64) -> Result<f64> {
        match self {
            LatticePath::One(p) => p.sup_norm(t0, t1),
            LatticePath::Two(p) => p.sup_norm(t0, t1),
        }
    }
}

pub fn gen_walk_1d(gen: &mut Generator, n: usize) -> LatticePath1D {
    let mut positions = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    positions.push(s);
    for _ in 0..n {
        s += gen.walk_step_1d();
        positions.push(s);
    }
    LatticePath1D { positions }
}

pub fn gen_walk_2d(gen: &mut Generator, n: usize) -> LatticePath2D {
    let mut positions = Vec::with_capacity(n + 1);
    let mut p = [0i64; 2];
    positions.push(p);
    for _ in 0..n {
        let [dx, dy] = gen.walk_step_2d();
        p = [p[0] + dx, p[1] + dy];
        positions.push(p);
    }
    LatticePath2D { positions }
}

/// `n`-step walk with i.i.d. uniform steps in the requested dimension.
pub fn gen_walk(gen: &mut Generator, n: usize, dim: Dim) -> LatticePath {
    match dim {
        Dim::One => LatticePath::One(gen_walk_1d(gen, n)),
        Dim::Two => LatticePath::Two(gen_walk_2d(gen, n)),
    }
}

/// A planar walk written as two 1D walks along the lattice diagonals.
///
/// `comp1` counts steps of length `1/sqrt(2)` in direction `e^{i pi/4}` and
/// `comp2` in direction `e^{i 3pi/4}`, so `comp1 = x + y` and `comp2 = y - x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalPair {
    pub comp1: Vec<i64>,
    pub comp2: Vec<i64>,
}

impl DiagonalPair {
    pub fn len(&self) -> usize {
        self.comp1.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn decompose(path: &LatticePath2D) -> DiagonalPair {
    let (comp1, comp2) = path.positions.iter().map(|&[x, y]| (x + y, y - x)).unzip();
    DiagonalPair { comp1, comp2 }
}

pub fn compose(pair: &DiagonalPair) -> Result<LatticePath2D> {
    if pair.comp1.len() != pair.comp2.len() {
        return Err(Error::Shape {
            expected: pair.comp1.len(),
            found: pair.comp2.len(),
        });
    }
    LatticePath1D::from_positions(pair.comp1.clone())?;
    LatticePath1D::from_positions(pair.comp2.clone())?;
    let positions = pair
        .comp1
        .iter()
        .zip(&pair.comp2)
        .map(|(&u, &v)| [(u - v) / 2, (u + v) / 2])
        .collect();
    // Both components move by +-1 each step, so u - v stays even and the
    // division is exact.
    LatticePath2D::from_positions(positions)
}

/// Piecewise-linear Brownian path on a uniform grid `t_k = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    dt: f64,
    dim: Dim,
    /// Interleaved coordinates, `dim.count()` per grid point.
    coords: Vec<f64>,
}

impl WienerPath {
    /// Wraps grid values. `coords` holds `dim.count()` numbers per point and
    /// must start at the origin.
    pub fn from_grid(dt: f64, dim: Dim, coords: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(domain(format!("time step must be positive, got {dt}")));
        }
        let d = dim.count();
        if coords.is_empty() || coords.len() % d != 0 {
            return Err(Error::Invalid(
                "grid length must be a positive multiple of the dimension".into(),
            ));
        }
        if coords[..d].iter().any(|&c| c != 0.0) {
            return Err(Error::Invalid("path must start at the origin".into()));
        }
        Ok(Self { dt, dim, coords })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Number of grid points, including the origin.
    pub fn points(&self) -> usize {
        self.coords.len() / self.dim.count()
    }

    pub fn horizon(&self) -> f64 {
        (self.points() - 1) as f64 * self.dt
    }

    /// Grid value `k` as a planar point (`y = 0` in one dimension).
    #[inline]
    pub fn at(&self, k: usize) -> [f64; 2] {
        match self.dim {
            Dim::One => [self.coords[k], 0.0],
            Dim::Two => [self.coords[2 * k], self.coords[2 * k + 1]],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Value at real time `t` by linear interpolation between grid points.
    pub fn eval(&self, t: f64) -> Result<[f64; 2]> {
        check_time(t, self.horizon())?;
        let steps = self.points() - 1;
        if steps == 0 {
            return Ok(self.at(0));
        }
        let (k, frac) = segment(t / self.dt, steps);
        let a = self.at(k);
        let b = self.at(k + 1);
        Ok([a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])])
    }

    /// Largest norm over grid points in the window (and the interpolated
    /// window ends). This understates the continuous supremum.
    pub fn sup_norm(&self, t0: f64, t1: f64) -> Result<f64> {
        check_window(t0, t1, self.horizon())?;
        let norm = |p: [f64; 2]| p[0].hypot(p[1]);
        let mut best = norm(self.eval(t0)?).max(norm(self.eval(t1)?));
        let first = (t0 / self.dt).ceil() as usize;
        let last = ((t1 / self.dt).floor() as usize).min(self.points() - 1);
        for k in first..=last {
            best = best.max(norm(self.at(k)));
        }
        Ok(best)
    }

    /// Squared norm of the final grid value.
    pub fn end_norm_sq(&self) -> f64 {
        let [x, y] = self.at(self.points() - 1);
        x * x + y * y
    }
}

/// Number of grid steps needed to cover `horizon` with spacing `dt`.
pub fn grid_steps(horizon: f64, dt: f64) -> usize {
    let ratio = horizon / dt;
    // Absorb rounding so that e.g. 1.0 / 0.01 gives 100 steps, not 101.
    let r = ratio.round();
    if (ratio - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Brownian path with independent `N(0, dt)` increments per coordinate on
/// `ceil(horizon / dt)` grid steps.
pub fn gen_wiener(gen: &mut Generator, horizon: f64, dt: f64, dim: Dim) -> Result<WienerPath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(domain(format!("time step must be positive, got {dt}")));
    }
    if !(horizon >= dt) {
        return Err(domain(format!(
            "horizon {horizon} shorter than time step {dt}"
        )));
    }
    let steps = grid_steps(horizon, dt);
    let d = dim.count();
    let sd = dt.sqrt();
    let mut coords = Vec::with_capacity((steps + 1) * d);
    coords.extend(std::iter::repeat_n(0.0, d));
    let mut cur = [0.0f64; 2];
    for _ in 0..steps {
        for c in cur.iter_mut().take(d) {
            *c += sd * gen.standard_gaussian();
        }
        coords.extend_from_slice(&cur[..d]);
    }
    Ok(WienerPath { dt, dim, coords })
}

/// Writes a path as CSV with header `time,x[,y]`.
pub trait DumpCsv {
    fn dump_csv<W: Write>(&self, out: &mut W) -> io::Result<()>;
}

impl DumpCsv for LatticePath1D {
    fn dump_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "time,x")?;
        for (k, x) in self.positions.iter().enumerate() {
            writeln!(out, "{k},{x}")?;
        }
        Ok(())
    }
}

impl DumpCsv for LatticePath2D {
    fn dump_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "time,x,y")?;
        for (k, [x, y]) in self.positions.iter().enumerate() {
            writeln!(out, "{k},{x},{y}")?;
        }
        Ok(())
    }
}

impl DumpCsv for WienerPath {
    fn dump_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        match self.dim {
            Dim::One => writeln!(out, "time,x")?,
            Dim::Two => writeln!(out, "time,x,y")?,
        }
        for k in 0..self.points() {
            let t = format_real(k as f64 * self.dt);
            let [x, y] = self.at(k);
            match self.dim {
                Dim::One => writeln!(out, "{t},{}", format_real(x))?,
                Dim::Two => writeln!(out, "{t},{},{}", format_real(x), format_real(y))?,
            }
        }
        Ok(())
    }
}
