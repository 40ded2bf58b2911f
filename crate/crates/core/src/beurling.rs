//! Escape probabilities past obstacles that reach the boundary circle.
//!
//! The continuous part is exact for the slit disk: the chain
//! `z -> sqrt(z) -> -1/z -> z + 1/z` maps the slit disk onto the upper
//! half-plane, the circle onto `[-2, 2]` and the start `-eps` onto
//! `i (1/sqrt(eps) - sqrt(eps))`, so the escape probability is a Cauchy
//! mass. Monte Carlo runs check it with Brownian paths and check the
//! lattice analogue with walks.

use crate::error::{domain, Error, Result};
use crate::experiments::stats::{slope_fit, TailEstimate};
use crate::rng::{par_shards, Generator, StreamKey};
use std::f64::consts::PI;
use std::path::Path;

/// Sorted distinct Euclidean norms of `points`.
pub fn circular_projection(points: &[[f64; 2]]) -> Vec<f64> {
    let mut r: Vec<f64> = points.iter().map(|p| p[0].hypot(p[1])).collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// [`circular_projection`] of lattice points.
pub fn circular_projection_lattice(points: &[[i64; 2]]) -> Vec<f64> {
    let p: Vec<[f64; 2]> = points.iter().map(|q| [q[0] as f64, q[1] as f64]).collect();
    circular_projection(&p)
}

/// Probability that Brownian motion from `i y` first meets the real line
/// in `[a, b]`. Infinite endpoints are allowed.
pub fn cauchy_exit_prob(y: f64, a: f64, b: f64) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain(format!("height y = {y} must be positive")));
    }
    if !(a <= b) {
        return Err(domain(format!("interval [{a}, {b}] is empty")));
    }
    Ok(((b / y).atan() - (a / y).atan()) / PI)
}

/// Probability that Brownian motion from `-eps` leaves the unit disk
/// before touching the slit `[0, 1)`.
pub fn slit_disk_exit_exact(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    Ok(2.0 / PI * (2.0 * eps.sqrt() / (1.0 - eps)).atan())
}

/// Escape count and its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingResult {
    pub escaped: u64,
    pub total: u64,
    pub estimate: TailEstimate,
}

impl HittingResult {
    fn from_counts(escaped: u64, total: u64) -> Self {
        Self {
            escaped,
            total,
            estimate: TailEstimate::from_counts(escaped, total),
        }
    }
}

/// A closed segment of a polygonal obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn new(a: [f64; 2], b: [f64; 2]) -> Self {
        Self { a, b }
    }

    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let d = [self.b[0] - self.a[0], self.b[1] - self.a[1]];
        let w = [p[0] - self.a[0], p[1] - self.a[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 > 0.0 {
            ((w[0] * d[0] + w[1] * d[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (w[0] - t * d[0]).hypot(w[1] - t * d[1])
    }

    /// True if the straight move `p -> q` meets the segment.
    pub fn crossed_by(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        let orient = |o: [f64; 2], u: [f64; 2], v: [f64; 2]| {
            (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
        };
        let d1 = orient(self.a, self.b, p);
        let d2 = orient(self.a, self.b, q);
        let d3 = orient(p, q, self.a);
        let d4 = orient(p, q, self.b);
        if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
            return true;
        }
        // Touching or collinear cases.
        let on = |o: [f64; 2], u: [f64; 2], v: [f64; 2], d: f64| {
            d == 0.0
                && v[0] >= o[0].min(u[0])
                && v[0] <= o[0].max(u[0])
                && v[1] >= o[1].min(u[1])
                && v[1] <= o[1].max(u[1])
        };
        on(self.a, self.b, p, d1)
            || on(self.a, self.b, q, d2)
            || on(p, q, self.a, d3)
            || on(p, q, self.b, d4)
    }
}

/// Step-size control for [`mc_bm_escape`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Smallest time step, used within `sqrt(dt) / scale` of the boundary.
    pub dt: f64,
    /// Step standard deviation as a fraction of the distance to the
    /// nearest boundary; zero gives fixed steps of `dt`.
    pub scale: f64,
}

impl StepControl {
    pub const DEFAULT_SCALE: f64 = 0.2;

    pub fn adaptive(dt: f64) -> Self {
        Self {
            dt,
            scale: Self::DEFAULT_SCALE,
        }
    }

    pub fn fixed(dt: f64) -> Self {
        Self { dt, scale: 0.0 }
    }
}

/// Brownian paths from `start` until they leave the unit disk (escape) or
/// a move crosses an obstacle segment (hit).
pub fn mc_bm_escape(
    start: [f64; 2],
    obstacle: &[Segment],
    steps: StepControl,
    samples: u64,
    key: StreamKey,
) -> Result<HittingResult> {
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    if !(steps.dt > 0.0) || !(steps.scale >= 0.0) {
        return Err(domain("time step must be positive"));
    }
    if start[0].hypot(start[1]) >= 1.0 {
        return Err(domain("start must lie inside the unit disk"));
    }
    if obstacle.iter().any(|s| s.distance(start) == 0.0) {
        return Err(domain("start lies on the obstacle"));
    }
    let shards = par_shards(key, samples, 1024, |gen, count| {
        (0..count)
            .filter(|_| bm_escapes(gen, start, obstacle, steps))
            .count() as u64
    });
    Ok(HittingResult::from_counts(shards.iter().sum(), samples))
}

fn bm_escapes(
    gen: &mut Generator,
    start: [f64; 2],
    obstacle: &[Segment],
    steps: StepControl,
) -> bool {
    let mut p = start;
    loop {
        let radius = p[0].hypot(p[1]);
        let mut h = steps.dt;
        if steps.scale > 0.0 {
            let d = obstacle
                .iter()
                .map(|s| s.distance(p))
                .fold(1.0 - radius, f64::min);
            h = h.max((steps.scale * d).powi(2));
        }
        let sd = h.sqrt();
        let q = [
            p[0] + sd * gen.standard_gaussian(),
            p[1] + sd * gen.standard_gaussian(),
        ];
        if obstacle.iter().any(|s| s.crossed_by(p, q)) {
            return false;
        }
        if q[0] * q[0] + q[1] * q[1] >= 1.0 {
            return true;
        }
        p = q;
    }
}

/// The slit `[0, 1)` on the positive real axis.
pub fn slit() -> Segment {
    Segment::new([0.0, 0.0], [1.0, 0.0])
}

/// Escape from `-eps` past the slit, with adaptive steps floored at `dt`.
pub fn mc_bm_slit(eps: f64, dt: f64, samples: u64, key: StreamKey) -> Result<HittingResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    mc_bm_escape(
        [-eps, 0.0],
        &[slit()],
        StepControl::adaptive(dt),
        samples,
        key,
    )
}

/// Default time step for slit runs at start distance `eps`.
pub fn default_slit_dt(eps: f64) -> f64 {
    1e-5 * eps
}

/// A finite lattice obstacle, stored as a bitmap over `|x|, |y| <= half`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteObstacle {
    radius: f64,
    half: i64,
    bits: Vec<bool>,
    points: Vec<[i64; 2]>,
}

impl DiscreteObstacle {
    /// Points outside the box `|x|, |y| <= ceil(radius)` are dropped: a walk
    /// stopped on leaving the radius-`radius` disk never reaches them first.
    pub fn new(points: &[[i64; 2]], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(domain(format!("radius {radius} must be positive")));
        }
        let half = radius.ceil() as i64;
        let side = (2 * half + 1) as usize;
        let mut bits = vec![false; side * side];
        let mut kept = Vec::new();
        for &[x, y] in points {
            if x.abs() <= half && y.abs() <= half {
                let i = ((x + half) as usize) * side + (y + half) as usize;
                if !bits[i] {
                    bits[i] = true;
                    kept.push([x, y]);
                }
            }
        }
        Ok(Self {
            radius,
            half,
            bits,
            points: kept,
        })
    }

    /// `{(k, 0) : 0 <= k <= radius}`.
    pub fn half_line(radius: f64) -> Result<Self> {
        let end = radius.floor() as i64;
        let pts: Vec<[i64; 2]> = (0..=end).map(|k| [k, 0]).collect();
        Self::new(&pts, radius)
    }

    /// Origin plus the lattice points with `radius - 1 < |p| <= radius`.
    pub fn ring(radius: f64) -> Result<Self> {
        let half = radius.ceil() as i64;
        let mut pts = vec![[0, 0]];
        for x in -half..=half {
            for y in -half..=half {
                let r = ((x * x + y * y) as f64).sqrt();
                if r > radius - 1.0 && r <= radius {
                    pts.push([x, y]);
                }
            }
        }
        Self::new(&pts, radius)
    }

    /// Reads whitespace- or comma-separated integer pairs, one per line;
    /// `#` starts a comment.
    pub fn from_file(path: &Path, radius: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text, radius)
    }

    pub fn parse(text: &str, radius: f64) -> Result<Self> {
        let mut pts = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let bad = || Error::Invalid(format!("line {}: expected two integers", no + 1));
            if fields.len() != 2 {
                return Err(bad());
            }
            let x = fields[0].parse().map_err(|_| bad())?;
            let y = fields[1].parse().map_err(|_| bad())?;
            pts.push([x, y]);
        }
        Self::new(&pts, radius)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.points
    }

    #[inline]
    pub fn contains(&self, p: [i64; 2]) -> bool {
        let h = self.half;
        if p[0].abs() > h || p[1].abs() > h {
            return false;
        }
        let side = (2 * h + 1) as usize;
        self.bits[((p[0] + h) as usize) * side + (p[1] + h) as usize]
    }

    /// Membership in the admissible class: contains the origin and reaches
    /// norm at least `radius`.
    pub fn is_admissible(&self) -> bool {
        let reach = self
            .points
            .iter()
            .map(|p| ((p[0] * p[0] + p[1] * p[1]) as f64).sqrt())
            .fold(0.0, f64::max);
        self.contains([0, 0]) && reach >= self.radius
    }
}

/// Walks from `start` run until `|S| > R` (escape) or a step lands in the
/// obstacle (hit). A simultaneous exit counts as escape.
pub fn mc_walk_beurling(
    start: [i64; 2],
    obstacle: &DiscreteObstacle,
    samples: u64,
    key: StreamKey,
) -> Result<HittingResult> {
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    if obstacle.contains(start) {
        return Err(domain(format!("start {start:?} lies in the obstacle")));
    }
    if !obstacle.is_admissible() {
        return Err(domain("obstacle must contain 0 and reach the radius"));
    }
    let r = obstacle.radius;
    if ((start[0] * start[0] + start[1] * start[1]) as f64).sqrt() >= r {
        return Err(domain("start must lie inside the radius"));
    }
    // |S|^2 > R^2 in integers: |S|^2 >= floor(R^2) + 1.
    let exit_sq = (r * r).floor() as i64 + 1;
    let shards = par_shards(key, samples, 1024, |gen, count| {
        let mut escaped = 0u64;
        for _ in 0..count {
            let mut p = start;
            loop {
                let [dx, dy] = gen.walk_step_2d();
                p = [p[0] + dx, p[1] + dy];
                if p[0] * p[0] + p[1] * p[1] >= exit_sq {
                    escaped += 1;
                    break;
                }
                if obstacle.contains(p) {
                    break;
                }
            }
        }
        escaped
    });
    Ok(HittingResult::from_counts(shards.iter().sum(), samples))
}

/// Power-law fit of `p ~ ratio^slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub used: usize,
    /// Pairs dropped for a nonpositive ratio or probability.
    pub excluded: usize,
}

pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < 3 {
        return Err(domain("need at least three pairs"));
    }
    let good: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(r, p)| r > 0.0 && p > 0.0)
        .collect();
    let xs: Vec<f64> = good.iter().map(|g| g.0.ln()).collect();
    let ys: Vec<f64> = good.iter().map(|g| g.1.ln()).collect();
    let fit = slope_fit(&xs, &ys)?;
    Ok(ExponentFit {
        slope: fit.slope,
        stderr: fit.stderr,
        intercept: fit.intercept,
        used: good.len(),
        excluded: pairs.len() - good.len(),
    })
}

/// Random polyline from the origin to the unit circle with vertices in the
/// right half-plane, so its circular projection is `[0, 1]`.
pub fn random_radial_polyline(gen: &mut Generator, vertices: usize) -> Vec<Segment> {
    let k = vertices.max(1);
    let mut radii: Vec<f64> = (0..k - 1).map(|_| gen.uniform01()).collect();
    radii.sort_by(f64::total_cmp);
    radii.push(1.0);
    let mut prev = [0.0, 0.0];
    let mut segs = Vec::with_capacity(k);
    for r in radii {
        let theta = (gen.uniform01() - 0.5) * 0.9 * PI;
        let v = [r * theta.cos(), r * theta.sin()];
        segs.push(Segment::new(prev, v));
        prev = v;
    }
    segs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_stream;

    #[test]
    fn projection_examples() {
        assert_eq!(circular_projection_lattice(&[[3, 4]]), vec![5.0]);
        let line: Vec<[i64; 2]> = (0..=6).map(|k| [k, 0]).collect();
        assert_eq!(
            circular_projection_lattice(&line),
            (0..=6).map(|k| k as f64).collect::<Vec<_>>()
        );
        let e = [[1.0, 1.0], [0.0, 2.0]];
        let f = [[1.0, 1.0], [0.0, 2.0], [3.0, 0.0]];
        let (ge, gf) = (circular_projection(&e), circular_projection(&f));
        assert!(ge.iter().all(|r| gf.contains(r)));
    }

    #[test]
    fn cauchy_examples() {
        assert!((cauchy_exit_prob(2.0, -2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(cauchy_exit_prob(1e-12, -2.0, 2.0).unwrap() > 1.0 - 1e-12);
        let b: f64 = 1.7;
        let y = 0.9;
        assert!((cauchy_exit_prob(y, -b, b).unwrap() - 2.0 / PI * (b / y).atan()).abs() < 1e-15);
        assert!(cauchy_exit_prob(0.0, 0.0, 1.0).is_err());
        assert!(cauchy_exit_prob(-1.0, 0.0, 1.0).is_err());
        assert!(cauchy_exit_prob(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cauchy_partition_sums_to_one() {
        let cuts = [
            f64::NEG_INFINITY,
            -50.0,
            -3.0,
            -1.0,
            -0.2,
            0.0,
            0.4,
            1.1,
            2.5,
            40.0,
            f64::INFINITY,
        ];
        let total: f64 = cuts
            .windows(2)
            .map(|w| cauchy_exit_prob(0.7, w[0], w[1]).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slit_exact_values() {
        let v = slit_disk_exit_exact(0.01).unwrap();
        assert!((v - 2.0 / PI * (0.2f64 / 0.99).atan()).abs() < 1e-15);
        assert!((v - 0.12690).abs() < 1e-5);
        let v = slit_disk_exit_exact(0.25).unwrap();
        assert!((v - 0.5903).abs() < 1e-4);
        // Agrees with the Cauchy law at the image height.
        for eps in [0.01, 0.3, 0.8] {
            let y = 1.0 / f64::sqrt(eps) - f64::sqrt(eps);
            let c = cauchy_exit_prob(y, -2.0, 2.0).unwrap();
            assert!((c - slit_disk_exit_exact(eps).unwrap()).abs() < 1e-14);
        }
        assert!(slit_disk_exit_exact(1e-7).unwrap() < 1e-3);
        assert!(slit_disk_exit_exact(1.0 - 1e-7).unwrap() > 0.999);
        assert!(slit_disk_exit_exact(0.0).is_err());
        assert!(slit_disk_exit_exact(1.0).is_err());
        let mut prev = 0.0;
        for i in 1..1000 {
            let v = slit_disk_exit_exact(i as f64 / 1000.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        for eps in [1e-2, 1e-3, 1e-4] {
            let ratio = slit_disk_exit_exact(eps).unwrap() / f64::sqrt(eps);
            assert!((ratio - 4.0 / PI).abs() < 0.02);
        }
    }

    #[test]
    fn exact_slope_is_one_half() {
        let pairs: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| (e, slit_disk_exit_exact(e).unwrap()))
            .collect();
        let fit = fit_exponent(&pairs).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.01, "{}", fit.slope);
        let lin: Vec<(f64, f64)> = [0.1, 0.2, 0.4, 0.8].iter().map(|&r| (r, 3.0 * r)).collect();
        assert!((fit_exponent(&lin).unwrap().slope - 1.0).abs() < 1e-12);
        let with_zero = [(0.1, 0.0), (0.2, 0.1), (0.4, 0.2), (0.8, 0.4)];
        assert_eq!(fit_exponent(&with_zero).unwrap().excluded, 1);
        assert!(fit_exponent(&lin[..2]).is_err());
    }

    #[test]
    fn segment_geometry() {
        let s = slit();
        assert!(s.crossed_by([0.5, 0.1], [0.5, -0.1]));
        assert!(!s.crossed_by([-0.5, 0.1], [-0.5, -0.1]));
        assert!(!s.crossed_by([0.5, 0.1], [0.6, 0.2]));
        assert!(s.crossed_by([0.5, 0.1], [0.5, 0.0]));
        assert!((s.distance([-0.3, 0.4]) - 0.5).abs() < 1e-15);
        assert!((s.distance([0.3, -0.2]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn bm_slit_errors() {
        assert!(mc_bm_slit(0.25, 1e-5, 0, StreamKey::new(0, 0)).is_err());
        assert!(mc_bm_slit(0.0, 1e-5, 10, StreamKey::new(0, 0)).is_err());
    }

    #[test]
    fn bm_slit_close_to_exact() {
        let eps = 0.25;
        let r = mc_bm_slit(eps, default_slit_dt(eps), 20_000, StreamKey::new(17, 0)).unwrap();
        let exact = slit_disk_exit_exact(eps).unwrap();
        let tol = (3.0 * r.estimate.std_err_at(exact)).max(0.02);
        assert!(
            (r.estimate.p_hat - exact).abs() <= tol,
            "{} vs {exact}",
            r.estimate.p_hat
        );
    }

    #[test]
    fn projection_direction() {
        // Escape past a polyline is at most escape past its projection, the slit.
        let eps = 0.1;
        let n = 20_000;
        let slit_r = mc_bm_slit(eps, default_slit_dt(eps), n, StreamKey::new(23, 0)).unwrap();
        let mut g = make_stream(StreamKey::new(23, 1));
        for i in 0..5 {
            let poly = random_radial_polyline(&mut g, 4);
            let e = mc_bm_escape(
                [-eps, 0.0],
                &poly,
                StepControl::adaptive(default_slit_dt(eps)),
                n,
                StreamKey::new(23, 100 + i),
            )
            .unwrap();
            let sigma = (e.estimate.std_err().powi(2) + slit_r.estimate.std_err().powi(2)).sqrt();
            assert!(e.estimate.p_hat <= slit_r.estimate.p_hat + 3.0 * sigma);
        }
    }

    #[test]
    fn obstacle_class_and_parse() {
        let h = DiscreteObstacle::half_line(8.0).unwrap();
        assert!(h.is_admissible());
        assert!(h.contains([8, 0]) && !h.contains([9, 0]) && !h.contains([-1, 0]));
        let o = DiscreteObstacle::parse("# pts\n0 0\n1,0\n 2 0 # tip\n\n", 2.0).unwrap();
        assert!(o.is_admissible());
        assert_eq!(o.points().len(), 3);
        assert!(DiscreteObstacle::parse("0 0 1\n", 2.0).is_err());
        assert!(DiscreteObstacle::parse("a b\n", 2.0).is_err());
        let short = DiscreteObstacle::parse("0 0\n1 0\n", 4.0).unwrap();
        assert!(!short.is_admissible());
    }

    #[test]
    fn ring_blocks_every_walk() {
        let ring = DiscreteObstacle::ring(10.0).unwrap();
        let r = mc_walk_beurling([3, 2], &ring, 2000, StreamKey::new(4, 0)).unwrap();
        assert_eq!(r.escaped, 0);
        assert!(mc_walk_beurling([0, 0], &ring, 10, StreamKey::new(4, 0)).is_err());
    }

    #[test]
    fn walk_escape_decreases_with_radius() {
        let mut prev = 1.0;
        for (i, r) in [32.0, 64.0, 128.0].into_iter().enumerate() {
            let obs = DiscreteObstacle::half_line(r).unwrap();
            let res = mc_walk_beurling([-1, 0], &obs, 20_000, StreamKey::new(6, i as u64)).unwrap();
            let p = res.estimate.p_hat;
            assert!(p < prev);
            // Bounded by 4 (|x|/R)^(1/2).
            assert!(p <= 4.0 * (1.0 / r).sqrt());
            prev = p;
        }
    }
}
