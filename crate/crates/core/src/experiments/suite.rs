//! Named verification suites, one per statement id.
//!
//! Every suite returns a long-format table (`quantity, n, param, value,
//! reference, ci_lo, ci_hi, pass`) plus a list of checks. Monte Carlo
//! suites that fail are rerun once on the seed `seed + 1`; the report
//! records which seed produced it.

use std::time::Instant;

use super::stats::{slope_fit, wilson_interval, MeanEstimate, Moments, TailEstimate, Z95};
use super::tails::{
    bm_mean_square, check_bm_tails, check_reflection, check_rw_tails, small_ball_fit,
    walk_mean_square, Process, Splitting,
};
use crate::beurling::{
    cauchy_exit_prob, default_slit_dt, fit_exponent, mc_bm_escape, mc_bm_slit, mc_walk_beurling,
    random_radial_polyline, slit_disk_exit_exact, DiscreteObstacle, StepControl,
};
use crate::coupling::{
    coupling_sup, embed, embed_2d, max_time_deviation, sample_exit_time, tail_curve, CouplingStats,
};
use crate::dirichlet::{
    aj_bound_check, boundary_bound_report, constant_phi, oracle_hitting_mc, oracle_linear_solve,
    solve, BoundKind, LaplaceFactor, RectangleSpec, SpectralRectangle,
};
use crate::error::{domain, Result};
use crate::exactdist::{exact_pmf_1d, exact_pmf_2d, lclt_trend, lclt_upper_ratio, TailConvention};
use crate::paths::{Dim, LatticePath};
use crate::rng::{make_stream, par_replicates, par_shards, StreamKey, DEFAULT_SHARD, UNIT_STEPS};
use crate::table::{Cell, Table};

/// Statement ids understood by [`run_suite`].
pub const LEMMA_IDS: [&str; 16] = [
    "3.1", "3.2", "3.3", "3.4", "3.8", "3.9", "3.10", "4.3", "4.4", "5.1", "5.2", "6.1", "6.2",
    "6.3", "6.4", "6.5",
];

/// Base Monte Carlo count; a `samples` override rescales every count
/// relative to it.
pub const BASE_SAMPLES: u64 = 100_000;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20240101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub samples: Option<u64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: None,
        }
    }
}

impl SuiteConfig {
    /// `default` scaled by `samples / BASE_SAMPLES`, never below `floor`.
    fn count(&self, default: u64, floor: u64) -> u64 {
        match self.samples {
            None => default,
            Some(s) => ((default as u128 * s as u128 / BASE_SAMPLES as u128) as u64).max(floor),
        }
    }

    fn key(&self, tag: u32) -> StreamKey {
        StreamKey::new(self.seed, 0).block(tag)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Informational checks are reported but do not decide the suite.
    pub gating: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub lemma: String,
    /// Seed that produced this report.
    pub seed: u64,
    pub retried: bool,
    pub table: Table,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Builder {
    table: Table,
    checks: Vec<Check>,
}

fn opt(v: Option<f64>) -> Cell {
    v.map(Cell::Real)
        .unwrap_or_else(|| Cell::Text(String::new()))
}

impl Builder {
    fn new() -> Self {
        Self {
            table: Table::new(&[
                "quantity",
                "n",
                "param",
                "value",
                "reference",
                "ci_lo",
                "ci_hi",
                "pass",
            ]),
            checks: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        quantity: &str,
        n: Option<u64>,
        param: Option<f64>,
        value: f64,
        reference: Option<f64>,
        ci: Option<(f64, f64)>,
        pass: Option<bool>,
    ) {
        self.table.push(vec![
            Cell::from(quantity),
            n.map(Cell::from)
                .unwrap_or_else(|| Cell::Text(String::new())),
            opt(param),
            Cell::Real(value),
            opt(reference),
            opt(ci.map(|c| c.0)),
            opt(ci.map(|c| c.1)),
            pass.map(Cell::from)
                .unwrap_or_else(|| Cell::Text(String::new())),
        ]);
    }

    fn tail(
        &mut self,
        quantity: &str,
        n: u64,
        param: f64,
        e: &TailEstimate,
        reference: Option<f64>,
        pass: Option<bool>,
    ) {
        self.row(
            quantity,
            Some(n),
            Some(param),
            e.p_hat,
            reference,
            Some((e.ci_lo, e.ci_hi)),
            pass,
        );
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            gating: true,
            detail,
        });
    }

    fn note(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            gating: false,
            detail,
        });
    }

    fn finish(self, lemma: &str, seed: u64) -> SuiteReport {
        let pass = self.checks.iter().filter(|c| c.gating).all(|c| c.pass);
        SuiteReport {
            lemma: lemma.into(),
            seed,
            retried: false,
            table: self.table,
            checks: self.checks,
            pass,
        }
    }
}

fn is_statistical(lemma: &str) -> bool {
    matches!(
        lemma,
        "3.1" | "3.2" | "3.3" | "3.4" | "4.3" | "4.4" | "5.1" | "5.2" | "6.2"
    )
}

/// Runs one suite, retrying a failed Monte Carlo suite once on `seed + 1`.
pub fn run_suite(lemma: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let first = run_once(lemma, cfg)?;
    if first.pass || !is_statistical(lemma) {
        return Ok(first);
    }
    let retry = SuiteConfig {
        seed: cfg.seed.wrapping_add(1),
        ..*cfg
    };
    let mut second = run_once(lemma, &retry)?;
    second.retried = true;
    Ok(second)
}

/// Runs one suite on exactly the configured seed.
pub fn run_once(lemma: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let b = match lemma {
        "3.1" => mean_square(cfg)?,
        "3.2" => reflection(cfg)?,
        "3.3" => bm_tails(cfg)?,
        "3.4" => small_ball_suite(cfg)?,
        "3.8" => lclt(cfg)?,
        "3.9" => rw_tails(Dim::One)?,
        "3.10" => rw_tails(Dim::Two)?,
        "4.3" => continuous_beurling(cfg)?,
        "4.4" => discrete_beurling(cfg)?,
        "5.1" => coupling_1d(cfg)?,
        "5.2" => coupling_2d(cfg)?,
        "6.1" => aj_suite()?,
        "6.2" => rectangle_suite(cfg)?,
        "6.3" => strip_suite()?,
        "6.4" => boundary_suite(BoundKind::Corner)?,
        "6.5" => boundary_suite(BoundKind::Strip)?,
        other => {
            return Err(domain(format!(
                "unknown statement id {other:?}; expected one of {}",
                LEMMA_IDS.join(", ")
            )))
        }
    };
    Ok(b.finish(lemma, cfg.seed))
}

fn mean_square(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let ns = [1, 10, 100, 1000, 10_000];
    let mut worst = 0.0f64;
    for (dim, label) in [(Dim::One, "walk_exact_1d"), (Dim::Two, "walk_exact_2d")] {
        for (n, m) in walk_mean_square(dim, &ns) {
            let err = (m - n as f64).abs() / n as f64;
            worst = worst.max(err);
            b.row(
                label,
                Some(n as u64),
                None,
                m,
                Some(n as f64),
                None,
                Some(err <= 1e-9),
            );
        }
    }
    b.check(
        "walk_exact",
        worst <= 1e-9,
        format!("max relative error {worst:.3e}"),
    );

    let n = 10_000usize;
    let samples = cfg.count(20_000, 200);
    let shards = par_shards(cfg.key(1), samples, DEFAULT_SHARD, |gen, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            let (mut x, mut y) = (0i64, 0i64);
            for _ in 0..n {
                let [dx, dy] = gen.walk_step_2d();
                x += dx;
                y += dy;
            }
            m.push((x * x + y * y) as f64);
        }
        m
    });
    let mut mom = Moments::default();
    shards.iter().for_each(|m| mom.merge(m));
    let walk = mom.estimate();
    let z = (walk.mean - n as f64).abs() / walk.std_err;
    b.row(
        "walk_mc_2d",
        Some(n as u64),
        None,
        walk.mean,
        Some(n as f64),
        Some((walk.ci_lo, walk.ci_hi)),
        Some(z <= 3.0),
    );
    b.check(
        "walk_mc",
        z <= 3.0,
        format!("mean {:.2} vs {n}, z = {z:.2}", walk.mean),
    );

    let t = 100.0;
    let bm = bm_mean_square(t, 1.0, cfg.count(BASE_SAMPLES, 200), cfg.key(2))?;
    let z = (bm.mean - 2.0 * t).abs() / bm.std_err;
    b.row(
        "bm_mc_2d",
        Some(t as u64),
        None,
        bm.mean,
        Some(2.0 * t),
        Some((bm.ci_lo, bm.ci_hi)),
        Some(z <= 3.0),
    );
    b.check(
        "bm_mc",
        z <= 3.0,
        format!("mean {:.2} vs {}, z = {z:.2}", bm.mean, 2.0 * t),
    );
    Ok(b)
}

fn reflection(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let samples = cfg.count(BASE_SAMPLES, 200);
    let runs = [
        (Process::Walk, 400usize, vec![10.0, 20.0, 30.0], 1.0, "walk"),
        (Process::Bm, 100usize, vec![10.0, 20.0], 0.1, "bm"),
    ];
    for (i, (process, n, levels, dt, label)) in runs.into_iter().enumerate() {
        let rep = check_reflection(process, n, &levels, samples, dt, cfg.key(10 + i as u32))?;
        for r in &rep.rows {
            b.tail(
                &format!("{label}_endpoint"),
                n as u64,
                r.a,
                &r.endpoint,
                None,
                Some(r.lower_ok),
            );
            b.tail(
                &format!("{label}_running_max"),
                n as u64,
                r.a,
                &r.running_max,
                Some(2.0 * r.endpoint.p_hat),
                Some(r.upper_ok),
            );
        }
        b.check(
            &format!("{label}_bracket"),
            rep.pass(),
            format!("{} levels at n = {n}", rep.rows.len()),
        );
    }
    Ok(b)
}

fn bm_tails(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let samples = cfg.count(BASE_SAMPLES, 200);
    let rep = check_bm_tails(&[100], &[0.5, 1.0, 2.0], samples, 100, cfg.key(20))?;
    let mut worst_z = 0.0f64;
    for e in &rep.endpoint {
        worst_z = worst_z.max(e.z);
        b.tail(
            "endpoint_tail",
            e.n as u64,
            e.r,
            &e.estimate,
            Some(e.exact),
            Some(e.within(3.0)),
        );
    }
    b.check(
        "endpoint_exact",
        rep.endpoint.iter().all(|e| e.within(3.0)),
        format!("max z = {worst_z:.2}"),
    );
    let mut sup_ok = true;
    for r in &rep.sup.rows {
        // Reflection caps the running-max ratio at 2.
        let se = (r.lhs * (1.0 - r.lhs) / samples as f64).sqrt();
        let ok = r.ratio <= 2.0 + 3.0 * se / r.rhs;
        sup_ok &= ok;
        b.row(
            "sup_tail",
            Some(r.n as u64),
            Some(r.param),
            r.lhs,
            Some(2.0 * r.rhs),
            None,
            Some(ok),
        );
    }
    b.check(
        "sup_ratio_at_most_two",
        sup_ok,
        format!("max ratio {:.3}", rep.sup.full_constant),
    );
    b.check("sup_dominates_endpoint", rep.sup_dominates, String::new());
    Ok(b)
}

fn small_ball_suite(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let n = 10_000.0;
    let rep = small_ball_fit(
        n,
        1.0,
        &[2.0, 3.0, 4.0, 5.0],
        Splitting::default(),
        cfg.key(30),
    )?;
    for p in &rep.points {
        b.row(
            "confinement",
            Some(n as u64),
            Some(p.r),
            p.p,
            None,
            Some((p.p - 3.0 * p.std_err, p.p + 3.0 * p.std_err)),
            None,
        );
    }
    let f = &rep.fit;
    b.row(
        "log_slope_in_r2",
        None,
        None,
        f.slope,
        None,
        Some((f.slope - 3.0 * f.stderr, f.slope + 3.0 * f.stderr)),
        None,
    );
    b.row(
        "fit_r2",
        None,
        None,
        f.r2,
        Some(0.95),
        None,
        Some(f.r2 >= 0.95),
    );
    b.check(
        "exponential_decay",
        f.slope < 0.0 && f.r2 >= 0.95,
        format!("slope {:.4}, r2 {:.4}", f.slope, f.r2),
    );
    let j0 = 2.404825557695773f64;
    b.note(
        "annulus_rate",
        (f.slope + j0 * j0 / 2.0).abs() <= 0.6,
        format!("slope {:.4} vs {:.4}", f.slope, -j0 * j0 / 2.0),
    );
    Ok(b)
}

/// `C(n, j) / 2^n` by the multiplicative formula.
fn binomial_mass(n: usize, j: usize) -> f64 {
    let j = j.min(n - j);
    let mut c = 1.0f64;
    for i in 0..j {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c * 0.5f64.powi(n as i32)
}

/// Planar law by enumerating all `4^n` step sequences.
fn enumerate_planar(n: usize) -> std::collections::BTreeMap<[i64; 2], f64> {
    let mut counts = std::collections::BTreeMap::new();
    let total = 1u64 << (2 * n);
    for code in 0..total {
        let mut p = [0i64; 2];
        let mut c = code;
        for _ in 0..n {
            let s = UNIT_STEPS[(c & 3) as usize];
            p[0] += s[0];
            p[1] += s[1];
            c >>= 2;
        }
        *counts.entry(p).or_insert(0u64) += 1;
    }
    counts
        .into_iter()
        .map(|(p, k)| (p, k as f64 / total as f64))
        .collect()
}

fn lclt(_cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let mut worst = 0.0f64;
    for n in 0..=60usize {
        let pmf = exact_pmf_1d(n);
        for j in 0..=n {
            let want = binomial_mass(n, j);
            let got = pmf.marginal_mass(2 * j as i64 - n as i64);
            worst = worst.max((got - want).abs() / want);
        }
    }
    b.row(
        "pmf_1d_vs_binomial",
        Some(60),
        None,
        worst,
        Some(1e-12),
        None,
        Some(worst <= 1e-12),
    );
    b.check(
        "pmf_1d_binomial",
        worst <= 1e-12,
        format!("max relative error {worst:.3e}"),
    );

    let mut worst = 0.0f64;
    for n in 0..=8usize {
        let pmf = exact_pmf_2d(n);
        for (p, want) in enumerate_planar(n) {
            worst = worst.max((pmf.mass(p) - want).abs());
        }
        worst = worst.max((pmf.total_mass() - 1.0).abs());
    }
    b.row(
        "pmf_2d_vs_enumeration",
        Some(8),
        None,
        worst,
        Some(1e-14),
        None,
        Some(worst <= 1e-14),
    );
    b.check(
        "pmf_2d_enumeration",
        worst <= 1e-14,
        format!("max abs error {worst:.3e}"),
    );

    let trend = lclt_trend(&[100, 400, 1600], 0.6, 2)?;
    for &(n, e) in &trend {
        b.row(
            "lclt_max_rel_error",
            Some(n),
            Some(0.6),
            e,
            Some(0.05),
            None,
            None,
        );
    }
    let first_ok = trend[0].1 <= 0.05;
    let decreasing = trend.windows(2).all(|w| w[1].1 < w[0].1);
    b.check("lclt_error_at_100", first_ok, format!("{:.4e}", trend[0].1));
    b.check("lclt_error_decreasing", decreasing, format!("{trend:?}"));

    let up = lclt_upper_ratio(2000)?;
    b.row(
        "upper_constant",
        Some(up.argmax_n),
        Some(up.argmax_k as f64),
        up.constant,
        None,
        None,
        None,
    );
    b.check(
        "upper_constant_finite",
        up.constant.is_finite(),
        format!("{:.6}", up.constant),
    );
    Ok(b)
}

fn tail_grid() -> (Vec<usize>, Vec<f64>) {
    (
        vec![10, 20, 50, 100, 200, 500, 1000],
        (1..=8).map(|i| i as f64 * 0.5).collect(),
    )
}

fn rw_tails(dim: Dim) -> Result<Builder> {
    let mut b = Builder::new();
    let (ns, rs) = tail_grid();
    for (conv, label) in [
        (TailConvention::Doubled, "doubled"),
        (TailConvention::Same, "same"),
    ] {
        let c = check_rw_tails(dim, conv, &ns, &rs, 0.2)?;
        for r in &c.rows {
            b.row(
                &format!("tail_ratio_{label}"),
                Some(r.n as u64),
                Some(r.param),
                r.ratio,
                Some(c.constant),
                None,
                Some(r.ratio <= c.constant * 1.2),
            );
        }
        b.check(
            &format!("constant_stable_{label}"),
            c.pass,
            format!(
                "half-grid constant {:.4}, full {:.4}",
                c.constant, c.full_constant
            ),
        );
    }
    Ok(b)
}

fn continuous_beurling(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let samples = cfg.count(BASE_SAMPLES, 200);

    // Exit law partitions the boundary.
    let y = 0.37;
    let whole = cauchy_exit_prob(y, -1e12, 1e12)?;
    let split = cauchy_exit_prob(y, -1e12, 0.4)? + cauchy_exit_prob(y, 0.4, 1e12)?;
    let ok = (whole - 1.0).abs() <= 1e-9 && (split - whole).abs() <= 1e-12;
    b.row(
        "cauchy_total_mass",
        None,
        Some(y),
        whole,
        Some(1.0),
        None,
        Some(ok),
    );
    b.check("cauchy_partition", ok, format!("total {whole:.12}"));

    let mut slit_ok = true;
    for (i, eps) in [0.25, 0.04, 0.01].into_iter().enumerate() {
        let exact = slit_disk_exit_exact(eps)?;
        let mc = mc_bm_slit(eps, default_slit_dt(eps), samples, cfg.key(40 + i as u32))?;
        let tol = (3.0 * mc.estimate.std_err_at(exact)).max(0.02);
        let ok = (mc.estimate.p_hat - exact).abs() <= tol;
        slit_ok &= ok;
        b.tail(
            "slit_escape",
            samples,
            eps,
            &mc.estimate,
            Some(exact),
            Some(ok),
        );
    }
    b.check(
        "slit_mc_matches_exact",
        slit_ok,
        "tolerance max(3 sigma, 0.02)".into(),
    );

    let pairs: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| Ok((e, slit_disk_exit_exact(e)?)))
        .collect::<Result<_>>()?;
    let fit = fit_exponent(&pairs)?;
    b.row(
        "slit_exponent",
        None,
        None,
        fit.slope,
        Some(0.5),
        None,
        Some((fit.slope - 0.5).abs() <= 0.01),
    );
    b.check(
        "exact_exponent_half",
        (fit.slope - 0.5).abs() <= 0.01,
        format!("{:.5}", fit.slope),
    );

    // Escape past a radial polyline is at most escape past its projection.
    let eps = 0.1;
    let proj_samples = cfg.count(20_000, 200);
    let slit_r = mc_bm_slit(eps, default_slit_dt(eps), proj_samples, cfg.key(45))?;
    let mut g = make_stream(cfg.key(46));
    let mut proj_ok = true;
    for i in 0..3u32 {
        let poly = random_radial_polyline(&mut g, 4);
        let e = mc_bm_escape(
            [-eps, 0.0],
            &poly,
            StepControl::adaptive(default_slit_dt(eps)),
            proj_samples,
            cfg.key(47 + i),
        )?;
        let sigma = (e.estimate.std_err().powi(2) + slit_r.estimate.std_err().powi(2)).sqrt();
        let ok = e.estimate.p_hat <= slit_r.estimate.p_hat + 3.0 * sigma;
        proj_ok &= ok;
        b.tail(
            "polyline_escape",
            proj_samples,
            eps,
            &e.estimate,
            Some(slit_r.estimate.p_hat),
            Some(ok),
        );
    }
    b.check(
        "projection_reduces_escape",
        proj_ok,
        format!("slit escape {:.4}", slit_r.estimate.p_hat),
    );
    Ok(b)
}

fn discrete_beurling(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let samples = cfg.count(BASE_SAMPLES, 200);
    let mut pairs = Vec::new();
    let mut bound_ok = true;
    for (i, r) in [64.0, 128.0, 256.0].into_iter().enumerate() {
        let obs = DiscreteObstacle::half_line(r)?;
        let res = mc_walk_beurling([-1, 0], &obs, samples, cfg.key(50 + i as u32))?;
        let cap = 4.0 * (1.0 / r).sqrt();
        bound_ok &= res.estimate.ci_lo <= cap;
        pairs.push((1.0 / r, res.estimate.p_hat));
        b.tail(
            "half_line_escape",
            r as u64,
            r,
            &res.estimate,
            Some(cap),
            Some(res.estimate.ci_lo <= cap),
        );
    }
    let fit = fit_exponent(&pairs)?;
    let ok = (0.4..=0.6).contains(&fit.slope);
    b.row(
        "escape_exponent",
        None,
        None,
        fit.slope,
        Some(0.5),
        Some((fit.slope - 3.0 * fit.stderr, fit.slope + 3.0 * fit.stderr)),
        Some(ok),
    );
    b.check(
        "exponent_near_half",
        ok,
        format!("{:.4} +/- {:.4}", fit.slope, fit.stderr),
    );
    b.check("escape_below_bound", bound_ok, "P <= 4 (1/R)^(1/2)".into());
    Ok(b)
}

fn chi_square(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expect = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expect).powi(2) / expect)
        .sum()
}

/// 95% chi-square quantiles for 1 and 3 degrees of freedom.
const CHI2_95_DF1: f64 = 3.841458820694124;
const CHI2_95_DF3: f64 = 7.814727903251178;

fn step_counts(walk: &LatticePath) -> Vec<usize> {
    match walk {
        LatticePath::One(p) => {
            let up = p.steps().filter(|&s| s > 0).count();
            vec![up, p.len() - 1 - up]
        }
        LatticePath::Two(p) => {
            let mut c = vec![0usize; 4];
            for s in p.steps() {
                c[UNIT_STEPS.iter().position(|u| *u == s).expect("unit step")] += 1;
            }
            c
        }
    }
}

fn embedded_walk_law(b: &mut Builder, cfg: &SuiteConfig, dim: Dim, tag: u32) -> Result<()> {
    let steps = (cfg.count(BASE_SAMPLES, 1000) as usize) & !1;
    let crit = if dim == Dim::One {
        CHI2_95_DF1
    } else {
        CHI2_95_DF3
    };
    let stats = par_replicates(cfg.key(tag), 20, |gen, _| {
        embed(gen, steps, 0.25, dim).map(|rec| chi_square(&step_counts(&rec.walk)))
    });
    let mut passed = 0;
    for (i, s) in stats.into_iter().enumerate() {
        let s = s?;
        passed += (s <= crit) as u32;
        b.row(
            "step_chi_square",
            Some(steps as u64),
            Some(i as f64),
            s,
            Some(crit),
            None,
            Some(s <= crit),
        );
    }
    b.check(
        "embedded_walk_is_srw",
        passed >= 18,
        format!("{passed}/20 repeats below the 95% quantile"),
    );
    Ok(())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Coupling errors at horizons `2^lo ..= 2^hi` from one record per replicate.
fn sup_profile(
    cfg: &SuiteConfig,
    dim: Dim,
    lo: u32,
    hi: u32,
    reps: u64,
    dt: f64,
    tag: u32,
) -> Result<Vec<Vec<CouplingStats>>> {
    let ns: Vec<usize> = (lo..=hi).map(|k| 1usize << k).collect();
    let top = *ns.last().expect("nonempty");
    let per_rep = par_replicates(cfg.key(tag), reps, |gen, _| {
        let rec = embed(gen, top, dt, dim)?;
        ns.iter()
            .map(|&n| coupling_sup(&rec, n))
            .collect::<Result<Vec<_>>>()
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..ns.len())
        .map(|i| per_rep.iter().map(|r| r[i]).collect())
        .collect())
}

fn coupling_1d(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();

    let exits = cfg.count(BASE_SAMPLES, 1000);
    let shards = par_shards(cfg.key(60), exits, DEFAULT_SHARD, |gen, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(sample_exit_time(gen, 0.01).map(|t| t.0).unwrap_or(f64::NAN));
        }
        m
    });
    let mut mom = Moments::default();
    shards.iter().for_each(|m| mom.merge(m));
    let et: MeanEstimate = mom.estimate();
    let ok = (et.mean - 1.0).abs() <= 0.02;
    b.row(
        "mean_exit_time",
        Some(exits),
        Some(0.01),
        et.mean,
        Some(1.0),
        Some((et.ci_lo, et.ci_hi)),
        Some(ok),
    );
    b.check(
        "mean_exit_time_one",
        ok,
        format!("{:.5} +/- {:.5}", et.mean, et.std_err),
    );

    embedded_walk_law(&mut b, cfg, Dim::One, 61)?;

    let reps = cfg.count(200, 100);
    let (lo, hi) = (8u32, 16u32);
    let profile = sup_profile(cfg, Dim::One, lo, hi, reps, 0.1, 62)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut meds = Vec::new();
    for col in &profile {
        let n = col[0].n;
        let mut v: Vec<f64> = col.iter().map(|s| s.sup_distance).collect();
        let m = median(&mut v);
        meds.push((n, m));
        xs.push((n as f64).ln());
        ys.push(m.ln());
        b.row(
            "median_sup",
            Some(n as u64),
            None,
            m,
            Some((n as f64).powf(0.25)),
            None,
            None,
        );
    }
    let fit = slope_fit(&xs, &ys)?;
    let ok = (0.2..=0.3).contains(&fit.slope);
    b.row(
        "sup_growth_exponent",
        None,
        None,
        fit.slope,
        Some(0.25),
        Some((fit.slope - 3.0 * fit.stderr, fit.slope + 3.0 * fit.stderr)),
        Some(ok),
    );
    b.check(
        "sup_slope",
        ok,
        format!("{:.4} +/- {:.4}, r2 {:.4}", fit.slope, fit.stderr, fit.r2),
    );

    let scaled = |n: usize, m: f64| m / (n as f64).powf(0.25);
    let (n_a, m_a) = meds[2];
    let (n_b, m_b) = *meds.last().expect("nonempty");
    let ratio = scaled(n_b, m_b) / scaled(n_a, m_a);
    let ok = (0.6..=1.7).contains(&ratio);
    b.row(
        "scaled_median_ratio",
        Some(n_b as u64),
        Some(n_a as f64),
        ratio,
        Some(1.0),
        Some((0.6, 1.7)),
        Some(ok),
    );
    b.check("scaled_median_ratio", ok, format!("{ratio:.4}"));

    let at = profile
        .iter()
        .find(|c| c[0].n == 1 << 12)
        .expect("n = 2^12 in profile");
    let g_grid: Vec<f64> = (2..=10).map(|i| i as f64 * 0.5).collect();
    let curve = tail_curve(at, &g_grid)?;
    let mut decreasing = true;
    for w in curve.points.windows(2) {
        decreasing &= w[1].estimate.p_hat <= w[0].estimate.p_hat;
    }
    for p in &curve.points {
        b.tail("sup_exceedance", 1 << 12, p.g, &p.estimate, None, None);
    }
    let loglin =
        matches!((curve.decay_rate, curve.r2), (Some(s), Some(r2)) if s < 0.0 && r2 >= 0.9);
    b.check("tail_curve_decreasing", decreasing, String::new());
    b.check(
        "tail_curve_log_linear",
        loglin,
        format!("rate {:?}, r2 {:?}", curve.decay_rate, curve.r2),
    );

    // Deviation of the embedding times from the integers.
    let n = 1000usize;
    let samples = cfg.count(20_000, 200);
    let rs = [1.0, 2.0, 3.0];
    let counts = par_shards(cfg.key(63), samples, 256, |gen, count| {
        let mut c = [0u64; 3];
        for _ in 0..count {
            let d = max_time_deviation(gen, n, 0.1).unwrap_or(f64::INFINITY);
            for (ci, r) in c.iter_mut().zip(rs) {
                *ci += (d >= r * (n as f64).sqrt()) as u64;
            }
        }
        c
    });
    let mut ps = Vec::new();
    for (i, &r) in rs.iter().enumerate() {
        let hits: u64 = counts.iter().map(|c| c[i]).sum();
        let e = TailEstimate::from_counts(hits, samples);
        ps.push(e.p_hat);
        b.tail("time_deviation_tail", n as u64, r, &e, None, None);
    }
    let strictly = ps.windows(2).all(|w| w[1] < w[0]);
    let positive: Vec<(f64, f64)> = rs
        .iter()
        .zip(&ps)
        .filter(|p| *p.1 > 0.0)
        .map(|(&r, &p)| (r, p.ln()))
        .collect();
    let lin = if positive.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        slope_fit(&x, &y).map(|f| f.slope).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    b.check(
        "time_deviation_decay",
        strictly && lin < 0.0,
        format!("{ps:?}, log slope {lin:.3}"),
    );
    Ok(b)
}

fn coupling_2d(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    embedded_walk_law(&mut b, cfg, Dim::Two, 70)?;

    let steps = (cfg.count(BASE_SAMPLES, 1000) as usize) & !1;
    let mut g = make_stream(cfg.key(71));
    let rec = embed_2d(&mut g, steps, 0.25)?;
    let used = rec.assignment_counts(steps);
    let (lo, hi) = wilson_interval(used[0] as u64, steps as u64, Z95);
    let ok = lo <= 0.5 && 0.5 <= hi;
    b.row(
        "first_diagonal_share",
        Some(steps as u64),
        None,
        used[0] as f64 / steps as f64,
        Some(0.5),
        Some((lo, hi)),
        Some(ok),
    );
    b.note("diagonal_balance", ok, format!("{used:?}"));

    let profile = sup_profile(cfg, Dim::Two, 8, 12, cfg.count(100, 50), 0.1, 72)?;
    for col in &profile {
        let n = col[0].n;
        let mut v: Vec<f64> = col.iter().map(|s| s.sup_distance).collect();
        let m = median(&mut v);
        b.row(
            "median_sup",
            Some(n as u64),
            None,
            m,
            Some((n as f64).powf(0.25)),
            None,
            None,
        );
    }
    let mut first: Vec<f64> = profile[0].iter().map(|s| s.scaled()).collect();
    let mut last: Vec<f64> = profile
        .last()
        .expect("nonempty")
        .iter()
        .map(|s| s.scaled())
        .collect();
    let ratio = median(&mut last) / median(&mut first);
    let ok = (0.6..=1.7).contains(&ratio);
    b.row(
        "scaled_median_ratio",
        Some(1 << 12),
        Some(256.0),
        ratio,
        Some(1.0),
        Some((0.6, 1.7)),
        Some(ok),
    );
    b.check("scaled_median_ratio", ok, format!("{ratio:.4}"));
    Ok(b)
}

fn aj_suite() -> Result<Builder> {
    let mut b = Builder::new();
    let s = aj_bound_check(10_000)?;
    b.row(
        "roots_checked",
        Some(s.n_max as u64),
        None,
        s.roots as f64,
        None,
        None,
        None,
    );
    b.row(
        "max_residual",
        Some(s.n_max as u64),
        None,
        s.max_residual,
        Some(1e-13),
        None,
        Some(s.max_residual <= 1e-13),
    );
    b.row(
        "bound_violations",
        Some(s.n_max as u64),
        None,
        s.violations as f64,
        Some(0.0),
        None,
        Some(s.violations == 0),
    );
    b.row(
        "sharp_bound_violations",
        Some(s.n_max as u64),
        None,
        s.sharp_violations as f64,
        Some(0.0),
        None,
        Some(s.sharp_violations == 0),
    );
    b.check(
        "root_residual",
        s.max_residual <= 1e-13,
        format!("{:.3e}", s.max_residual),
    );
    b.check(
        "bounds_hold",
        s.violations == 0,
        format!("{} of {} roots", s.violations, s.roots),
    );
    b.note(
        "sharper_lower_bound",
        s.sharp_violations == 0,
        format!("{} violations", s.sharp_violations),
    );
    Ok(b)
}

/// Largest spectral vs linear-solve discrepancy over all `2 <= l, n <= 64`
/// with `phis` random data vectors each.
pub fn oracle_sweep(max_side: usize, phis: usize, key: StreamKey) -> Result<f64> {
    let pairs: Vec<(usize, usize)> = (2..=max_side)
        .flat_map(|l| (2..=max_side).map(move |n| (l, n)))
        .collect();
    let per = par_replicates(key, pairs.len() as u64, |gen, i| {
        let (l, n) = pairs[i as usize];
        let spec = SpectralRectangle::new(l, n)?;
        let lin = LaplaceFactor::new(l, n)?;
        let zeros = vec![0.0; n - 1];
        let mut worst = 0.0f64;
        for _ in 0..phis {
            let phi: Vec<f64> = (1..n).map(|_| 2.0 * gen.uniform01() - 1.0).collect();
            let a = spec.solve(&phi)?;
            let c = lin.solve(&zeros, &phi)?;
            worst = worst.max(a.max_abs_diff(&c));
        }
        Ok(worst)
    });
    per.into_iter()
        .try_fold(0.0f64, |w, r: Result<f64>| Ok(w.max(r?)))
}

fn rectangle_suite(cfg: &SuiteConfig) -> Result<Builder> {
    let mut b = Builder::new();
    let start = Instant::now();
    let worst = oracle_sweep(64, 20, cfg.key(80))?;
    let secs = start.elapsed().as_secs_f64();
    b.row(
        "spectral_vs_linear",
        Some(64),
        Some(20.0),
        worst,
        Some(1e-9),
        None,
        Some(worst <= 1e-9),
    );
    b.check(
        "oracle_agreement",
        worst <= 1e-9,
        format!("max abs diff {worst:.3e}"),
    );
    // Wall time stays out of the detail so reports remain reproducible.
    b.check(
        "oracle_sweep_time",
        secs <= 120.0,
        if secs <= 120.0 {
            "under 120 s"
        } else {
            "over 120 s"
        }
        .into(),
    );

    let spec = RectangleSpec::rectangle(2, 2, constant_phi(2, 1.0))?;
    let sp = solve(&spec)?.value(1, 1)?;
    let li = oracle_linear_solve(&spec, None)?.get(1, 1);
    let ok = (sp - 0.25).abs() <= 1e-12 && (li - 0.25).abs() <= 1e-12;
    b.row(
        "single_point",
        Some(2),
        Some(2.0),
        sp,
        Some(0.25),
        None,
        Some(ok),
    );
    b.check(
        "single_point_quarter",
        ok,
        format!("spectral {sp}, linear {li}"),
    );

    let (l, n) = (16usize, 16usize);
    let mut g = make_stream(cfg.key(81));
    let phi: Vec<f64> = (1..n).map(|_| g.uniform01()).collect();
    let spec = RectangleSpec::rectangle(l, n, phi.clone())?;
    let sol = solve(&spec)?;
    let grid = sol.grid().expect("finite rectangle");
    let (lo, hi) = phi.iter().fold((0.0f64, f64::NEG_INFINITY), |(a, c), &v| {
        (a.min(v), c.max(v))
    });
    let resid_ok = sol.max_residual() <= 1e-10;
    let maxp_ok = grid.min() >= lo - 1e-12 && grid.max() <= hi + 1e-12;
    b.row(
        "max_residual",
        Some(n as u64),
        Some(l as f64),
        sol.max_residual(),
        Some(1e-10),
        None,
        Some(resid_ok),
    );
    b.check("harmonic", resid_ok, format!("{:.3e}", sol.max_residual()));
    b.check(
        "maximum_principle",
        maxp_ok,
        format!("range [{:.4}, {:.4}]", grid.min(), grid.max()),
    );

    let samples = cfg.count(20_000, 200);
    let mut mc_ok = true;
    for i in 0..10u32 {
        let x = 1 + g.below(l as u64 - 1) as i64;
        let y = 1 + g.below(n as u64 - 1) as i64;
        let exact = sol.value(x as usize, y as usize)?;
        let h = oracle_hitting_mc(&spec, [x, y], cfg.key(82 + i), samples)?;
        let e = h.estimate;
        let ok = (e.mean - exact).abs() <= 3.0 * e.std_err.max(1e-12);
        mc_ok &= ok;
        b.row(
            "hitting_mc",
            Some(x as u64),
            Some(y as f64),
            e.mean,
            Some(exact),
            Some((e.ci_lo, e.ci_hi)),
            Some(ok),
        );
    }
    b.check(
        "hitting_mc_agreement",
        mc_ok,
        "10 interior points within 3 sigma".into(),
    );
    Ok(b)
}

fn strip_suite() -> Result<Builder> {
    let mut b = Builder::new();
    let spec = RectangleSpec::strip(2, constant_phi(2, 1.0))?;
    let want = 1.0 / (2.0 + 3f64.sqrt());
    let sp = solve(&spec)?.value(1, 1)?;
    let li = oracle_linear_solve(&spec, Some(40))?.get(1, 1);
    let ok = (sp - want).abs() <= 1e-12 && (li - want).abs() <= 1e-12;
    b.row(
        "single_point",
        Some(2),
        Some(1.0),
        sp,
        Some(want),
        None,
        Some(ok),
    );
    b.check(
        "single_point_exact",
        ok,
        format!("spectral {sp}, truncated {li}"),
    );

    let n = 4;
    let spec = RectangleSpec::strip(n, (1..n).map(|y| y as f64 / n as f64).collect())?;
    let a = oracle_linear_solve(&spec, Some(40))?;
    let c = oracle_linear_solve(&spec, Some(80))?;
    let d = a.max_abs_diff_upto(&c, 10);
    b.row(
        "truncation_40_vs_80",
        Some(n as u64),
        Some(10.0),
        d,
        Some(1e-8),
        None,
        Some(d <= 1e-8),
    );
    b.check("truncation_converged", d <= 1e-8, format!("{d:.3e}"));

    let mut worst = 0.0f64;
    for n in [4usize, 8] {
        let phi: Vec<f64> = (1..n)
            .map(|y| ((y * 7 % n) as f64 / n as f64) + 0.1)
            .collect();
        let spec = RectangleSpec::strip(n, phi)?;
        let sol = solve(&spec)?;
        let lin = oracle_linear_solve(&spec, Some(80))?;
        for x in 1..=10 {
            for y in 1..n {
                worst = worst.max((sol.value(x, y)? - lin.get(x, y)).abs());
            }
        }
        let r = sol.max_residual();
        b.row(
            "strip_residual",
            Some(n as u64),
            None,
            r,
            Some(1e-10),
            None,
            Some(r <= 1e-10),
        );
        b.check(
            &format!("strip_harmonic_{n}"),
            r <= 1e-10,
            format!("{r:.3e}"),
        );
    }
    b.row(
        "spectral_vs_truncated",
        None,
        Some(10.0),
        worst,
        Some(1e-9),
        None,
        Some(worst <= 1e-9),
    );
    b.check(
        "spectral_matches_truncated",
        worst <= 1e-9,
        format!("{worst:.3e}"),
    );
    Ok(b)
}

fn boundary_suite(kind: BoundKind) -> Result<Builder> {
    let mut b = Builder::new();
    let ns = [16, 32, 64, 128];
    let ratios: &[(f64, bool)] = match kind {
        BoundKind::Corner => &[(1.0, true), (0.5, false)],
        BoundKind::Strip => &[(1.0, true)],
    };
    for &(a, gating) in ratios {
        let rep = boundary_bound_report(kind, a, &ns)?;
        for r in &rep.rows {
            b.row(
                "max_scaled_value",
                Some(r.n as u64),
                Some(a),
                r.max_ratio,
                Some(rep.constant),
                None,
                None,
            );
        }
        let ok = rep.constant.is_finite() && rep.spread <= 1.25;
        let detail = format!("constant {:.4}, spread {:.4}", rep.constant, rep.spread);
        let name = format!("constant_stable_a{a}");
        if gating {
            b.check(&name, ok, detail);
        } else {
            b.note(&name, ok, detail);
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_and_enumeration_oracles() {
        assert_eq!(binomial_mass(4, 2), 6.0 / 16.0);
        let e = enumerate_planar(2);
        assert_eq!(e[&[0, 0]], 4.0 / 16.0);
        assert_eq!(e[&[1, 1]], 2.0 / 16.0);
        assert_eq!(e[&[2, 0]], 1.0 / 16.0);
        assert!((e.values().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_square_values() {
        assert_eq!(chi_square(&[50, 50]), 0.0);
        assert_eq!(chi_square(&[60, 40]), 4.0);
    }

    #[test]
    fn unknown_id_rejected() {
        assert!(run_suite("9.9", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn deterministic_suites_pass() {
        for id in ["3.9", "3.10", "6.3", "6.4", "6.5"] {
            let r = run_suite(id, &SuiteConfig::default()).unwrap();
            assert!(r.pass, "{id}: {:?}", r.checks);
            assert!(!r.retried);
        }
    }

    #[test]
    fn lclt_error_not_monotone_at_n_400() {
        // The k^2/n^2 prefactor term and the k^4/n^3 term nearly cancel at
        // the edge |k| = n^0.6 for n = 400, so the maximum error there dips
        // below its value at n = 1600.
        let r = run_suite("3.8", &SuiteConfig::default()).unwrap();
        for c in &r.checks {
            assert_eq!(c.pass, c.name != "lclt_error_decreasing", "{c:?}");
        }
    }

    #[test]
    fn small_run_is_reproducible() {
        let cfg = SuiteConfig {
            seed: 5,
            samples: Some(2000),
        };
        let a = run_once("4.4", &cfg).unwrap();
        let b = run_once("4.4", &cfg).unwrap();
        assert_eq!(a, b);
    }
}
