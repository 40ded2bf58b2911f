//! Tail, reflection, mean-square and small-ball experiments for walks and
//! Brownian motion.

use super::stats::{slope_fit, LinearFit, MeanEstimate, Moments, TailEstimate};
use super::BoundCheck;
use crate::error::{domain, Result};
use crate::exactdist::{exact_pmf_1d, exact_pmf_2d, tail_table, TailConvention};
use crate::paths::Dim;
use crate::rng::{par_replicates, par_shards, Generator, StreamKey, DEFAULT_SHARD};

/// Wilson-interval estimate of `P(event)` from `samples` independent draws.
pub fn estimate<F>(samples: u64, key: StreamKey, event: F) -> Result<TailEstimate>
where
    F: Fn(&mut Generator) -> bool + Sync,
{
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let hits: u64 = par_shards(key, samples, DEFAULT_SHARD, |gen, count| {
        (0..count).filter(|_| event(gen)).count() as u64
    })
    .iter()
    .sum();
    Ok(TailEstimate::from_counts(hits, samples))
}

/// Exact walk tails against `exp(-c r^2)` with the constant fitted on the
/// half grid.
pub fn check_rw_tails(
    dim: Dim,
    conv: TailConvention,
    n_list: &[usize],
    r_list: &[f64],
    tolerance: f64,
) -> Result<BoundCheck> {
    if n_list.is_empty() || r_list.is_empty() {
        return Err(domain("empty grid"));
    }
    let rows = tail_table(dim, n_list, r_list, conv)?;
    let label = match (dim, conv) {
        (Dim::One, TailConvention::Doubled) => "rw1d_doubled",
        (Dim::One, TailConvention::Same) => "rw1d_same",
        (Dim::Two, TailConvention::Doubled) => "rw2d_doubled",
        (Dim::Two, TailConvention::Same) => "rw2d_same",
    };
    Ok(BoundCheck::fit(
        label,
        n_list,
        r_list,
        rows.iter()
            .map(|r| (r.n, r.r, r.exact_tail, r.bound))
            .collect(),
        tolerance,
    ))
}

/// `E|S(n)|^2` from the exact law, for each `n`.
pub fn walk_mean_square(dim: Dim, n_list: &[usize]) -> Vec<(usize, f64)> {
    n_list
        .iter()
        .map(|&n| {
            (
                n,
                match dim {
                    Dim::One => exact_pmf_1d(n),
                    Dim::Two => exact_pmf_2d(n),
                }
                .second_moment(),
            )
        })
        .collect()
}

/// Monte Carlo `E|B(n)|^2` from grid paths with step `dt`.
pub fn bm_mean_square(n: f64, dt: f64, samples: u64, key: StreamKey) -> Result<MeanEstimate> {
    if samples == 0 || !(dt > 0.0) || !(n >= dt) {
        return Err(domain("need samples >= 1 and 0 < dt <= n"));
    }
    let steps = crate::paths::grid_steps(n, dt);
    let sd = dt.sqrt();
    let shards = par_shards(key, samples, DEFAULT_SHARD, |gen, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let (mut x, mut y) = (0.0, 0.0);
            for _ in 0..steps {
                x += sd * gen.standard_gaussian();
                y += sd * gen.standard_gaussian();
            }
            m.push(x * x + y * y);
        }
        m
    });
    let mut total = Moments::default();
    shards.iter().for_each(|m| total.merge(m));
    Ok(total.estimate())
}

/// Which process a reflection check runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    Walk,
    Bm,
}

/// Squared endpoint and squared running maximum of one planar path.
fn planar_extremes(gen: &mut Generator, process: Process, n: usize, dt: f64) -> (f64, f64) {
    let mut sup = 0.0f64;
    match process {
        Process::Walk => {
            let (mut x, mut y) = (0i64, 0i64);
            for _ in 0..n {
                let [dx, dy] = gen.walk_step_2d();
                x += dx;
                y += dy;
                sup = sup.max((x * x + y * y) as f64);
            }
            ((x * x + y * y) as f64, sup)
        }
        Process::Bm => {
            let steps = crate::paths::grid_steps(n as f64, dt);
            let sd = dt.sqrt();
            let (mut x, mut y) = (0.0f64, 0.0f64);
            for _ in 0..steps {
                x += sd * gen.standard_gaussian();
                y += sd * gen.standard_gaussian();
                sup = sup.max(x * x + y * y);
            }
            (x * x + y * y, sup)
        }
    }
}

/// One level of the reflection bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionRow {
    pub a: f64,
    pub endpoint: TailEstimate,
    pub running_max: TailEstimate,
    /// `P(|X(n)| >= a) <= P(sup >= a)` within three combined sigma.
    pub lower_ok: bool,
    /// `P(sup >= a) <= 2 P(|X(n)| >= a)` within three combined sigma.
    pub upper_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionReport {
    pub process: Process,
    pub n: usize,
    pub rows: Vec<ReflectionRow>,
}

impl ReflectionReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.lower_ok && r.upper_ok)
    }
}

/// Checks `P(|X(n)| >= a) <= P(sup_{s<=n} |X(s)| >= a) <= 2 P(|X(n)| >= a)`.
/// Brownian paths use grid step `dt`; the grid maximum understates the
/// true one, which can only help the upper side and leaves the lower side
/// exact.
pub fn check_reflection(
    process: Process,
    n: usize,
    a_list: &[f64],
    samples: u64,
    dt: f64,
    key: StreamKey,
) -> Result<ReflectionReport> {
    if a_list.is_empty() || a_list.iter().any(|&a| !(a > 0.0)) {
        return Err(domain("levels must be positive"));
    }
    if samples == 0 || n == 0 {
        return Err(domain("need n >= 1 and samples >= 1"));
    }
    if process == Process::Bm && !(dt > 0.0 && dt <= n as f64) {
        return Err(domain("need 0 < dt <= n"));
    }
    let k = a_list.len();
    let counts = par_shards(key, samples, DEFAULT_SHARD, |gen, count| {
        let mut c = vec![[0u64; 2]; k];
        for _ in 0..count {
            let (end, sup) = planar_extremes(gen, process, n, dt);
            for (ci, &a) in c.iter_mut().zip(a_list) {
                let a2 = a * a;
                ci[0] += (end >= a2) as u64;
                ci[1] += (sup >= a2) as u64;
            }
        }
        c
    });
    let rows = a_list
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let e: u64 = counts.iter().map(|c| c[i][0]).sum();
            let s: u64 = counts.iter().map(|c| c[i][1]).sum();
            let endpoint = TailEstimate::from_counts(e, samples);
            let running_max = TailEstimate::from_counts(s, samples);
            let (se, ss) = (endpoint.std_err(), running_max.std_err());
            ReflectionRow {
                a,
                endpoint,
                running_max,
                lower_ok: endpoint.p_hat <= running_max.p_hat + 3.0 * (se * se + ss * ss).sqrt(),
                upper_ok: running_max.p_hat
                    <= 2.0 * endpoint.p_hat + 3.0 * (ss * ss + 4.0 * se * se).sqrt(),
            }
        })
        .collect();
    Ok(ReflectionReport { process, n, rows })
}

/// Endpoint tail `P(|B(n)| >= r sqrt(n))` against `exp(-r^2/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointRow {
    pub n: usize,
    pub r: f64,
    pub estimate: TailEstimate,
    pub exact: f64,
    /// `|p_hat - exact|` in units of the binomial sigma at `exact`.
    pub z: f64,
}

impl EndpointRow {
    pub fn within(&self, sigmas: f64) -> bool {
        self.z <= sigmas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmTailReport {
    pub endpoint: Vec<EndpointRow>,
    /// Running-maximum tail over `exp(-r^2/2)`.
    pub sup: BoundCheck,
    /// Running-maximum tail at least the endpoint tail, within 3 sigma.
    pub sup_dominates: bool,
}

/// Endpoint and running-maximum tails of planar Brownian motion.
pub fn check_bm_tails(
    n_list: &[usize],
    r_list: &[f64],
    samples: u64,
    steps_per_path: usize,
    key: StreamKey,
) -> Result<BmTailReport> {
    if n_list.is_empty() || r_list.is_empty() {
        return Err(domain("empty grid"));
    }
    if samples == 0 || steps_per_path == 0 {
        return Err(domain("need samples and steps"));
    }
    let mut endpoint = Vec::new();
    let mut sup_rows = Vec::new();
    let mut dominates = true;
    for (i, &n) in n_list.iter().enumerate() {
        let dt = n as f64 / steps_per_path as f64;
        let rep = check_reflection(
            Process::Bm,
            n,
            &r_list
                .iter()
                .map(|r| (r * (n as f64).sqrt()).max(1e-300))
                .collect::<Vec<_>>(),
            samples,
            dt,
            key.offset((i as u64) << 24),
        )?;
        for (row, &r) in rep.rows.iter().zip(r_list) {
            let exact = (-r * r / 2.0).exp();
            let sigma = row.endpoint.std_err_at(exact);
            let z = if sigma > 0.0 {
                (row.endpoint.p_hat - exact).abs() / sigma
            } else if row.endpoint.p_hat == exact {
                0.0
            } else {
                f64::INFINITY
            };
            endpoint.push(EndpointRow {
                n,
                r,
                estimate: row.endpoint,
                exact,
                z,
            });
            dominates &= row.lower_ok;
            sup_rows.push((n, r, row.running_max.p_hat, exact));
        }
    }
    Ok(BmTailReport {
        endpoint,
        sup: BoundCheck::fit("bm_sup_tail", n_list, r_list, sup_rows, 0.2),
        sup_dominates: dominates,
    })
}

/// Splitting estimate of `P(sup_{t<=n} |B(t)| <= sqrt(n) / r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallBallEstimate {
    pub r: f64,
    pub radius: f64,
    pub p: f64,
    /// Standard error of `p` across independent batches.
    pub std_err: f64,
    pub batches: u64,
}

/// Parameters of the splitting estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splitting {
    pub particles: usize,
    pub batches: u64,
    /// Grid steps between resampling rounds.
    pub stage: usize,
}

impl Default for Splitting {
    fn default() -> Self {
        Self {
            particles: 400,
            batches: 8,
            stage: 20,
        }
    }
}

/// Confinement probability by sequential splitting: particles advance a
/// stage at a time, those that left the disk are dropped, survivors are
/// resampled back to full size, and the product of stage survival
/// fractions is unbiased for the confinement probability.
pub fn small_ball(
    n: f64,
    dt: f64,
    r: f64,
    split: Splitting,
    key: StreamKey,
) -> Result<SmallBallEstimate> {
    if !(r > 0.0) || !(dt > 0.0) || !(n >= dt) {
        return Err(domain("need r > 0 and 0 < dt <= n"));
    }
    if split.particles == 0 || split.batches == 0 || split.stage == 0 {
        return Err(domain("splitting parameters must be positive"));
    }
    let radius = n.sqrt() / r;
    let r2 = radius * radius;
    let steps = crate::paths::grid_steps(n, dt);
    let sd = dt.sqrt();
    let per_batch = par_replicates(key, split.batches, |gen, _| {
        let m = split.particles;
        let mut pts = vec![[0.0f64; 2]; m];
        let mut next = Vec::with_capacity(m);
        let mut log_p = 0.0f64;
        let mut done = 0;
        while done < steps {
            let len = split.stage.min(steps - done);
            next.clear();
            for p in &pts {
                let mut q = *p;
                let mut alive = true;
                for _ in 0..len {
                    q[0] += sd * gen.standard_gaussian();
                    q[1] += sd * gen.standard_gaussian();
                    if q[0] * q[0] + q[1] * q[1] > r2 {
                        alive = false;
                        break;
                    }
                }
                if alive {
                    next.push(q);
                }
            }
            done += len;
            if next.is_empty() {
                return 0.0;
            }
            log_p += (next.len() as f64 / m as f64).ln();
            // Systematic resampling back to m particles.
            let k = next.len();
            let u = gen.uniform01();
            pts.clear();
            for i in 0..m {
                let idx = (((i as f64 + u) * k as f64 / m as f64) as usize).min(k - 1);
                pts.push(next[idx]);
            }
        }
        log_p.exp()
    });
    let mut mom = Moments::default();
    per_batch.iter().for_each(|&p| mom.push(p));
    Ok(SmallBallEstimate {
        r,
        radius,
        p: mom.mean(),
        std_err: mom.std_err(),
        batches: split.batches,
    })
}

/// Small-ball probabilities over `r_list` with the fit of `ln p` on `r^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallBallReport {
    pub points: Vec<SmallBallEstimate>,
    pub fit: LinearFit,
}

pub fn small_ball_fit(
    n: f64,
    dt: f64,
    r_list: &[f64],
    split: Splitting,
    key: StreamKey,
) -> Result<SmallBallReport> {
    if r_list.len() < 2 {
        return Err(domain("need at least two radii"));
    }
    let points = r_list
        .iter()
        .enumerate()
        .map(|(i, &r)| small_ball(n, dt, r, split, key.offset((i as u64) << 24)))
        .collect::<Result<Vec<_>>>()?;
    if points.iter().any(|p| !(p.p > 0.0)) {
        return Err(domain(
            "a confinement estimate is zero; raise the particle count",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.r * p.r).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.p.ln()).collect();
    Ok(SmallBallReport {
        fit: slope_fit(&xs, &ys)?,
        points,
    })
}
