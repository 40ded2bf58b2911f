//! Skorokhod embedding of simple random walk into Brownian motion.
//!
//! In one dimension the walk is read off a Brownian path at the successive
//! times `T_k` at which the path has moved by one unit since `T_{k-1}`. In
//! the plane two independent one-dimensional embeddings are interleaved by
//! fair coin flips that decide which coordinate moves next.
//!
//! The path is simulated on a grid of spacing `dt`, but exit times are not
//! rounded to the grid. Between two grid values the path is a Brownian
//! bridge, whose probability of touching a level is explicit; the time of
//! the touch, given that it happens, is a transformed inverse Gaussian
//! draw. Exit times therefore have their exact law at every `dt`, and
//! `B(T_k)` equals the walk value exactly.

use crate::error::{domain, Result};
use crate::experiments::stats::{slope_fit, TailEstimate};
use crate::paths::{Dim, LatticePath, LatticePath1D, LatticePath2D, WienerPath};
use crate::rng::Generator;
use rand_distr::{Distribution, InverseGaussian};

/// One coordinate: grid values and the exit times and directions.
#[derive(Debug, Clone, PartialEq)]
struct ExitChain {
    grid: Vec<f64>,
    exit_times: Vec<f64>,
    sides: Vec<i8>,
}

/// Time for a bridge over `[0, h]` started `a` below a level, ending `delta`
/// away from it, to first touch the level, given that it does.
fn bridge_touch_time(gen: &mut Generator, a: f64, delta: f64, h: f64) -> f64 {
    // With s = h u / (h + u), u is inverse Gaussian with mean a h / delta
    // and shape a^2; delta = 0 gives the Levy limit u = a^2 / Z^2.
    let u = if delta > 1e-300 {
        let mean = a * h / delta;
        match InverseGaussian::new(mean, a * a) {
            Ok(ig) if mean.is_finite() => ig.sample(gen.raw()),
            _ => levy(gen, a),
        }
    } else {
        levy(gen, a)
    };
    if u.is_infinite() {
        return h;
    }
    h * u / (h + u)
}

fn levy(gen: &mut Generator, a: f64) -> f64 {
    let z = gen.standard_gaussian();
    a * a / (z * z)
}

/// Simulates one coordinate until the grid reaches `min_time` and at least
/// `min_exits` exits have occurred. Grid values are kept only if `keep`.
fn simulate_chain(
    gen: &mut Generator,
    dt: f64,
    min_time: f64,
    min_exits: usize,
    keep: bool,
) -> ExitChain {
    let sd = dt.sqrt();
    let mut grid = Vec::new();
    if keep {
        grid.push(0.0);
    }
    let mut exit_times = Vec::with_capacity(min_exits);
    let mut sides = Vec::with_capacity(min_exits);
    let mut center = 0.0f64;
    let mut x = 0.0f64;
    let mut k = 0u64;
    while (k as f64) * dt < min_time || exit_times.len() < min_exits {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        let y = x + sd * gen.standard_gaussian();
        let (mut s, mut cur) = (t0, x);
        loop {
            let h = t1 - s;
            let (up, dn) = (center + 1.0, center - 1.0);
            let level = if y >= up {
                Some(up)
            } else if y <= dn {
                Some(dn)
            } else {
                let p_up = (-2.0 * (up - cur) * (up - y) / h).exp();
                let p_dn = (-2.0 * (cur - dn) * (y - dn) / h).exp();
                let u = gen.uniform01();
                if u < p_up {
                    Some(up)
                } else if u < p_up + p_dn {
                    Some(dn)
                } else {
                    None
                }
            };
            let Some(b) = level else { break };
            let tau = bridge_touch_time(gen, (b - cur).abs(), (y - b).abs(), h);
            s = (s + tau).min(t1);
            exit_times.push(s);
            sides.push(if b > center { 1 } else { -1 });
            center = b;
            cur = b;
        }
        x = y;
        k += 1;
        if keep {
            grid.push(y);
        }
    }
    ExitChain {
        grid,
        exit_times,
        sides,
    }
}

/// Exit time of `[-1, 1]` for Brownian motion from 0, and the side hit.
pub fn sample_exit_time(gen: &mut Generator, dt: f64) -> Result<(f64, i8)> {
    check_dt(dt)?;
    let c = simulate_chain(gen, dt, 0.0, 1, false);
    Ok((c.exit_times[0], c.sides[0]))
}

/// `max_{1<=k<=n} |T_k - k|` for `n` consecutive exits.
pub fn max_time_deviation(gen: &mut Generator, n: usize, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    let c = simulate_chain(gen, dt, 0.0, n, false);
    Ok(c.exit_times[..n]
        .iter()
        .enumerate()
        .map(|(i, t)| (t - (i + 1) as f64).abs())
        .fold(0.0, f64::max))
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(domain(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

/// A Brownian path together with the walk embedded in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRecord {
    pub dim: Dim,
    /// Walk length.
    pub n: usize,
    pub wiener: WienerPath,
    /// Per coordinate: `T_0 = 0 < T_1 < ...`.
    pub exit_times: Vec<Vec<f64>>,
    pub walk: LatticePath,
    /// In the plane, the coordinate (0 or 1) moved at each walk step.
    pub assignment: Vec<u8>,
}

impl CouplingRecord {
    /// `U_m^j`: steps among the first `m` assigned to coordinate `j`.
    pub fn assignment_counts(&self, m: usize) -> [usize; 2] {
        let ones = self.assignment[..m].iter().filter(|&&a| a == 1).count();
        [m - ones, ones]
    }
}

/// One-dimensional embedding with `n` walk steps; the Brownian path covers
/// at least `[0, n]`.
pub fn embed_1d(gen: &mut Generator, n: usize, dt: f64) -> Result<CouplingRecord> {
    check_dt(dt)?;
    let c = simulate_chain(gen, dt, n as f64, n, true);
    let mut exit_times = Vec::with_capacity(c.exit_times.len() + 1);
    exit_times.push(0.0);
    exit_times.extend_from_slice(&c.exit_times);
    let steps: Vec<i64> = c.sides[..n].iter().map(|&s| s as i64).collect();
    Ok(CouplingRecord {
        dim: Dim::One,
        n,
        wiener: WienerPath::from_grid(dt, Dim::One, c.grid)?,
        exit_times: vec![exit_times],
        walk: LatticePath::One(LatticePath1D::from_steps(&steps)?),
        assignment: Vec::new(),
    })
}

/// Planar embedding with `n` walk steps (`n` even); the Brownian path
/// covers at least `[0, n/2]`, matching walk time `2t` against `B(t)`.
pub fn embed_2d(gen: &mut Generator, n: usize, dt: f64) -> Result<CouplingRecord> {
    check_dt(dt)?;
    if n % 2 != 0 {
        return Err(domain(format!("planar horizon n = {n} must be even")));
    }
    let assignment: Vec<u8> = (0..n).map(|_| gen.walk_step_1d().max(0) as u8).collect();
    let ones = assignment.iter().filter(|&&a| a == 1).count();
    let needs = [n - ones, ones];
    let horizon = n as f64 / 2.0;
    let chains: Vec<ExitChain> = needs
        .iter()
        .map(|&m| simulate_chain(gen, dt, horizon, m, true))
        .collect();
    // Grids may differ in length; keep the common prefix.
    let points = chains[0].grid.len().min(chains[1].grid.len());
    let mut coords = Vec::with_capacity(2 * points);
    for k in 0..points {
        coords.push(chains[0].grid[k]);
        coords.push(chains[1].grid[k]);
    }
    let mut used = [0usize; 2];
    let mut pos = [0i64; 2];
    let mut positions = Vec::with_capacity(n + 1);
    positions.push(pos);
    for &a in &assignment {
        let j = a as usize;
        pos[j] += chains[j].sides[used[j]] as i64;
        used[j] += 1;
        positions.push(pos);
    }
    let exit_times = chains
        .iter()
        .map(|c| {
            std::iter::once(0.0)
                .chain(c.exit_times.iter().copied())
                .collect()
        })
        .collect();
    Ok(CouplingRecord {
        dim: Dim::Two,
        n,
        wiener: WienerPath::from_grid(dt, Dim::Two, coords)?,
        exit_times,
        walk: LatticePath::Two(LatticePath2D::from_positions(positions)?),
        assignment,
    })
}

pub fn embed(gen: &mut Generator, n: usize, dt: f64, dim: Dim) -> Result<CouplingRecord> {
    match dim {
        Dim::One => embed_1d(gen, n, dt),
        Dim::Two => embed_2d(gen, n, dt),
    }
}

/// Coupling error of one record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingStats {
    pub n: usize,
    pub dim: Dim,
    pub dt: f64,
    /// `sup |B(t) - S(t)|` over `[0, n]` (line) or `sup |B(t) - S(2t)|`
    /// over `[0, n/2]` (plane), taken on the grid.
    pub sup_distance: f64,
    /// `max_k |T_k - k|` over the exits used by the walk.
    pub max_time_deviation: f64,
}

impl CouplingStats {
    /// `sup_distance / n^{1/4}`.
    pub fn scaled(&self) -> f64 {
        self.sup_distance / (self.n as f64).powf(0.25)
    }
}

#[inline]
fn lerp_1d(pos: &[i64], t: f64) -> f64 {
    let i = (t.floor() as usize).min(pos.len() - 1);
    let f = t - i as f64;
    if f <= 0.0 || i + 1 >= pos.len() {
        pos[i] as f64
    } else {
        pos[i] as f64 + f * (pos[i + 1] - pos[i]) as f64
    }
}

/// Coupling error over walk horizon `n`, which must not exceed the
/// record's.
pub fn coupling_sup(record: &CouplingRecord, n: usize) -> Result<CouplingStats> {
    if n > record.n {
        return Err(domain(format!(
            "horizon {n} exceeds record length {}",
            record.n
        )));
    }
    let w = &record.wiener;
    let dt = w.dt();
    let mut sup = 0.0f64;
    let mut dev = 0.0f64;
    match &record.walk {
        LatticePath::One(walk) => {
            let pos = walk.positions();
            let last = ((n as f64 / dt + 1e-9).floor() as usize).min(w.points() - 1);
            for k in 0..=last {
                let t = (k as f64 * dt).min(n as f64);
                sup = sup.max((w.at(k)[0] - lerp_1d(pos, t)).abs());
            }
            let times = &record.exit_times[0];
            for (k, &t) in times.iter().enumerate().take(n + 1) {
                if t <= n as f64 {
                    sup = sup.max((pos[k] as f64 - lerp_1d(pos, t)).abs());
                }
                dev = dev.max((t - k as f64).abs());
            }
        }
        LatticePath::Two(walk) => {
            let pos = walk.positions();
            let xs: Vec<i64> = pos.iter().map(|p| p[0]).collect();
            let ys: Vec<i64> = pos.iter().map(|p| p[1]).collect();
            let half = n as f64 / 2.0;
            let last = ((half / dt + 1e-9).floor() as usize).min(w.points() - 1);
            for k in 0..=last {
                let t = (k as f64 * dt).min(half);
                let [bx, by] = w.at(k);
                let d = (bx - lerp_1d(&xs, 2.0 * t)).hypot(by - lerp_1d(&ys, 2.0 * t));
                sup = sup.max(d);
            }
            let used = record.assignment_counts(n);
            for (times, &m) in record.exit_times.iter().zip(&used) {
                for (k, &t) in times.iter().enumerate().take(m + 1) {
                    dev = dev.max((t - k as f64).abs());
                }
            }
        }
    }
    Ok(CouplingStats {
        n,
        dim: record.dim,
        dt,
        sup_distance: sup,
        max_time_deviation: dev,
    })
}

/// Exceedance frequency at one threshold multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub g: f64,
    pub threshold: f64,
    pub estimate: TailEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub n: usize,
    pub points: Vec<TailPoint>,
    /// Slope of `ln P(sup >= n^{1/4} g)` against `g` over the points with
    /// positive frequency; `None` with fewer than two such points.
    pub decay_rate: Option<f64>,
    /// `R^2` of that fit.
    pub r2: Option<f64>,
}

/// Empirical `P(sup >= n^{1/4} g)` for each `g`, from records sharing one `n`.
pub fn tail_curve(stats: &[CouplingStats], g_grid: &[f64]) -> Result<TailCurve> {
    if stats.len() < 100 {
        return Err(domain(format!(
            "need at least 100 samples, got {}",
            stats.len()
        )));
    }
    let n = stats[0].n;
    if stats.iter().any(|s| s.n != n) {
        return Err(domain("samples must share one horizon"));
    }
    let scale = (n as f64).powf(0.25);
    let total = stats.len() as u64;
    let points: Vec<TailPoint> = g_grid
        .iter()
        .map(|&g| {
            let threshold = scale * g;
            let hits = stats.iter().filter(|s| s.sup_distance >= threshold).count() as u64;
            TailPoint {
                g,
                threshold,
                estimate: TailEstimate::from_counts(hits, total),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.estimate.p_hat > 0.0)
        .map(|p| (p.g, p.estimate.p_hat.ln()))
        .unzip();
    let fit = slope_fit(&xs, &ys).ok();
    Ok(TailCurve {
        n,
        points,
        decay_rate: fit.map(|f| f.slope),
        r2: fit.map(|f| f.r2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::stats::Moments;
    use crate::rng::{make_stream, StreamKey};

    #[test]
    fn exit_time_mean_and_sides() {
        let mut g = make_stream(StreamKey::new(31, 0));
        let mut m = Moments::default();
        let mut plus = 0u64;
        let samples = 100_000;
        for _ in 0..samples {
            let (t, s) = sample_exit_time(&mut g, 0.05).unwrap();
            assert!(t > 0.0);
            m.push(t);
            plus += (s == 1) as u64;
        }
        assert!(
            (m.mean() - 1.0).abs() <= 3.0 * m.std_err(),
            "mean {}",
            m.mean()
        );
        // Var T = 2/3 for the exit of [-1, 1].
        assert!(
            (m.variance() - 2.0 / 3.0).abs() < 0.03,
            "var {}",
            m.variance()
        );
        let sigma = (0.25 / samples as f64).sqrt();
        assert!((plus as f64 / samples as f64 - 0.5).abs() <= 3.0 * sigma);
    }

    #[test]
    fn exit_time_tail_is_geometric() {
        let mut g = make_stream(StreamKey::new(31, 1));
        let samples = 50_000;
        let ts: Vec<f64> = (0..samples)
            .map(|_| sample_exit_time(&mut g, 0.1).unwrap().0)
            .collect();
        let ks = [1.0, 2.0, 3.0];
        let logs: Vec<f64> = ks
            .iter()
            .map(|&k| (ts.iter().filter(|&&t| t >= k).count() as f64 / samples as f64).ln())
            .collect();
        let fit = slope_fit(&ks, &logs).unwrap();
        assert!(fit.slope < 0.0 && fit.r2 > 0.99);
        // Leading eigenvalue pi^2 / 8 of the exit problem.
        assert!(
            (fit.slope + std::f64::consts::PI.powi(2) / 8.0).abs() < 0.1,
            "{}",
            fit.slope
        );
    }

    #[test]
    fn coarse_and_fine_grids_agree() {
        let mean = |dt: f64, seed: u64| {
            let mut g = make_stream(StreamKey::new(seed, 0));
            let mut m = Moments::default();
            for _ in 0..20_000 {
                m.push(sample_exit_time(&mut g, dt).unwrap().0);
            }
            m
        };
        for dt in [0.5, 0.01] {
            let m = mean(dt, 77);
            assert!(
                (m.mean() - 1.0).abs() <= 3.0 * m.std_err(),
                "dt {dt}: {}",
                m.mean()
            );
        }
    }

    #[test]
    fn one_step_embedding() {
        let mut g = make_stream(StreamKey::new(1, 9));
        let r = embed_1d(&mut g, 1, 0.01).unwrap();
        let LatticePath::One(w) = &r.walk else {
            panic!()
        };
        assert_eq!(w.len(), 1);
        assert_eq!(w.positions()[1].abs(), 1);
    }

    #[test]
    fn walk_is_read_off_the_path() {
        let mut g = make_stream(StreamKey::new(2, 0));
        let r = embed_1d(&mut g, 300, 0.02).unwrap();
        let LatticePath::One(w) = &r.walk else {
            panic!()
        };
        let times = &r.exit_times[0];
        assert!(times.windows(2).all(|p| p[1] > p[0]));
        assert!(w.steps().all(|s| s.abs() == 1));
        assert!(r.wiener.horizon() >= 300.0 - 1e-9);
        for (k, &t) in times.iter().enumerate().take(301).skip(1) {
            // The path between grid nodes around T_k stays within reach.
            let v = r.wiener.eval(t).unwrap()[0];
            assert!((v - w.positions()[k] as f64).abs() < 1.0, "k={k}");
        }
        let s = coupling_sup(&r, 300).unwrap();
        assert!(s.sup_distance > 0.0 && s.max_time_deviation >= 0.0);
        assert!(coupling_sup(&r, 301).is_err());
        assert_eq!(coupling_sup(&r, 0).unwrap().sup_distance, 0.0);
    }

    #[test]
    fn planar_embedding_structure() {
        let mut g = make_stream(StreamKey::new(3, 0));
        let r = embed_2d(&mut g, 1000, 0.05).unwrap();
        let LatticePath::Two(w) = &r.walk else {
            panic!()
        };
        for m in [0, 1, 17, 1000] {
            let [a, b] = r.assignment_counts(m);
            assert_eq!(a + b, m);
        }
        for (m, p) in w.positions().iter().enumerate() {
            let [a, b] = r.assignment_counts(m);
            assert_eq!((p[0] + a as i64) % 2, 0);
            assert_eq!((p[1] + b as i64) % 2, 0);
        }
        assert!(r.wiener.horizon() >= 500.0 - 1e-9);
        assert!(embed_2d(&mut g, 3, 0.05).is_err());
        let zero = embed_2d(&mut g, 0, 0.05).unwrap();
        assert_eq!(coupling_sup(&zero, 0).unwrap().sup_distance, 0.0);
    }

    #[test]
    fn planar_steps_are_uniform() {
        let mut g = make_stream(StreamKey::new(4, 0));
        let r = embed_2d(&mut g, 100_000, 0.25).unwrap();
        let LatticePath::Two(w) = &r.walk else {
            panic!()
        };
        let mut counts = [0u64; 4];
        for s in w.steps() {
            let i = crate::rng::UNIT_STEPS.iter().position(|u| *u == s).unwrap();
            counts[i] += 1;
        }
        let e = 25_000.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 11.345, "chi2 {chi2}");
    }

    #[test]
    fn tail_curve_shape() {
        let mut g = make_stream(StreamKey::new(5, 0));
        let stats: Vec<CouplingStats> = (0..120)
            .map(|_| coupling_sup(&embed_1d(&mut g, 256, 0.1).unwrap(), 256).unwrap())
            .collect();
        let c = tail_curve(&stats, &[0.0, 0.5, 1.0, 1.5, 2.0]).unwrap();
        assert_eq!(c.points[0].estimate.p_hat, 1.0);
        assert!(c
            .points
            .windows(2)
            .all(|p| p[1].estimate.p_hat <= p[0].estimate.p_hat));
        assert!(tail_curve(&stats[..50], &[1.0]).is_err());
    }
}
