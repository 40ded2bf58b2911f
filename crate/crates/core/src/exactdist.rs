//! Exact finite-time distributions of simple random walk, the local CLT
//! series, and exact tail probabilities.
//!
//! One-dimensional masses are `C(n, j) 2^-n` with `j` the number of up
//! steps. They are built in log space by the ratio recurrence outward from
//! the mode and normalized with a log-sum-exp, so tables stay accurate for
//! thousands of steps and deep tails underflow gracefully. The planar law
//! is the product of the two diagonal marginals and is never stored as a
//! dense grid.

use crate::error::{domain, Result};
use crate::paths::Dim;

/// Exact law of `S(n)` for 1D or planar simple random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    n: usize,
    dim: Dim,
    /// Log mass of the 1D walk at position `2j - n`, indexed by `j`.
    log_marginal: Vec<f64>,
    marginal: Vec<f64>,
    /// `upper[j] = sum of marginal[i] for i >= j`, summed from the top.
    upper: Vec<f64>,
}

fn log_binomial_row(n: usize) -> Vec<f64> {
    let mut lm = vec![0.0; n + 1];
    let mode = n.div_ceil(2);
    for j in mode + 1..=n {
        lm[j] = lm[j - 1] + ((n - j + 1) as f64 / j as f64).ln();
    }
    for j in mode..=n {
        lm[n - j] = lm[j];
    }
    let peak = lm[mode];
    let log_z = peak + lm.iter().map(|&v| (v - peak).exp()).sum::<f64>().ln();
    lm.iter_mut().for_each(|v| *v -= log_z);
    lm
}

impl PmfTable {
    fn build(n: usize, dim: Dim) -> Self {
        let log_marginal = log_binomial_row(n);
        let marginal: Vec<f64> = log_marginal.iter().map(|v| v.exp()).collect();
        let mut upper = vec![0.0; n + 2];
        for j in (0..=n).rev() {
            upper[j] = upper[j + 1] + marginal[j];
        }
        Self {
            n,
            dim,
            log_marginal,
            marginal,
            upper,
        }
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    fn index(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k.abs() > n || (k + n) % 2 != 0 {
            None
        } else {
            Some(((k + n) / 2) as usize)
        }
    }

    /// Mass of the 1D walk (or of one diagonal component) at `k`.
    pub fn marginal_mass(&self, k: i64) -> f64 {
        self.index(k).map_or(0.0, |j| self.marginal[j])
    }

    /// Natural log of [`Self::marginal_mass`]; `-inf` off the support.
    pub fn marginal_log_mass(&self, k: i64) -> f64 {
        self.index(k)
            .map_or(f64::NEG_INFINITY, |j| self.log_marginal[j])
    }

    /// `P(S(n) = point)`. For a 1D table only `point[0]` is read.
    pub fn mass(&self, point: [i64; 2]) -> f64 {
        match self.dim {
            Dim::One => self.marginal_mass(point[0]),
            Dim::Two => {
                let [x, y] = point;
                self.marginal_mass(x + y) * self.marginal_mass(y - x)
            }
        }
    }

    /// Support points with their masses. Planar tables stream over the
    /// product structure; nothing quadratic is allocated.
    pub fn support(&self) -> Box<dyn Iterator<Item = ([i64; 2], f64)> + '_> {
        let n = self.n as i64;
        let diag = (0..=self.n).map(move |j| 2 * j as i64 - n);
        match self.dim {
            Dim::One => Box::new(diag.zip(self.marginal.iter()).map(|(k, &m)| ([k, 0], m))),
            Dim::Two => Box::new(diag.clone().zip(self.marginal.iter()).flat_map(
                move |(u, &mu)| {
                    diag.clone().zip(self.marginal.iter()).map(move |(v, &mv)| {
                        // x = (u - v) / 2, y = (u + v) / 2 is integral by parity.
                        ([(u - v) / 2, (u + v) / 2], mu * mv)
                    })
                },
            )),
        }
    }

    pub fn total_mass(&self) -> f64 {
        let s: f64 = self.marginal.iter().sum();
        match self.dim {
            Dim::One => s,
            Dim::Two => s * s,
        }
    }

    /// `E|S(n)|^2` under the table.
    pub fn second_moment(&self) -> f64 {
        let n = self.n as i64;
        let diag_sq: f64 = self
            .marginal
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let k = (2 * j as i64 - n) as f64;
                k * k * m
            })
            .sum();
        match self.dim {
            Dim::One => diag_sq,
            // |S|^2 = (u^2 + v^2) / 2 with u, v independent copies.
            Dim::Two => diag_sq,
        }
    }

    /// `P(|V| >= t)` for one 1D marginal `V`, with `t` given squared.
    fn abs_tail_sq(&self, t_sq: f64) -> f64 {
        if t_sq <= 0.0 {
            return 1.0;
        }
        let n = self.n as i64;
        // Smallest support point v > 0 with v^2 >= t_sq.
        let mut v = t_sq.sqrt().floor() as i64 - 2;
        v = v.max(1);
        if (v + n) % 2 != 0 {
            v += 1;
        }
        while ((v * v) as f64) < t_sq {
            v += 2;
        }
        if v > n {
            return 0.0;
        }
        2.0 * self.upper[((v + n) / 2) as usize]
    }

    /// `P(|S(n)| >= t)` with the threshold given as `t^2`.
    pub fn tail_sq(&self, t_sq: f64) -> f64 {
        match self.dim {
            Dim::One => self.abs_tail_sq(t_sq),
            Dim::Two => {
                if t_sq <= 0.0 {
                    return 1.0;
                }
                // |S|^2 = (u^2 + v^2) / 2.
                let n = self.n as i64;
                let target = 2.0 * t_sq;
                (0..=self.n)
                    .map(|j| {
                        let u = (2 * j as i64 - n) as f64;
                        self.marginal[j] * self.abs_tail_sq(target - u * u)
                    })
                    .sum::<f64>()
                    .min(1.0)
            }
        }
    }
}

/// Exact law of the `n`-step 1D walk.
pub fn exact_pmf_1d(n: usize) -> PmfTable {
    PmfTable::build(n, Dim::One)
}

/// Exact law of the `n`-step planar walk, via
/// `P(S(n) = (x, y)) = P1(x + y) P1(y - x)`.
pub fn exact_pmf_2d(n: usize) -> PmfTable {
    PmfTable::build(n, Dim::Two)
}

/// Which time/threshold pairing a tail query uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailConvention {
    /// `P(|S(2n)| >= r sqrt(n))`: the table has `2n` steps.
    Doubled,
    /// `P(|S(n)| >= r sqrt(n))`: the table has `n` steps.
    Same,
}

impl TailConvention {
    /// Time parameter `n` in the threshold `r sqrt(n)` for a table with
    /// `steps` steps.
    pub fn time_param(self, steps: usize) -> f64 {
        match self {
            TailConvention::Doubled => steps as f64 / 2.0,
            TailConvention::Same => steps as f64,
        }
    }

    /// Number of steps of the table for time parameter `n`.
    pub fn steps_for(self, n: usize) -> usize {
        match self {
            TailConvention::Doubled => 2 * n,
            TailConvention::Same => n,
        }
    }

    /// Gaussian rate `c` in the comparison bound `exp(-c r^2)`.
    pub fn bound_rate(self) -> f64 {
        match self {
            TailConvention::Doubled => 0.25,
            TailConvention::Same => 0.5,
        }
    }
}

/// Exact `P(|S(2n)| >= r sqrt(n))` from a `2n`-step table.
pub fn tail_prob(pmf: &PmfTable, r: f64) -> Result<f64> {
    tail_prob_with(pmf, r, TailConvention::Doubled)
}

pub fn tail_prob_with(pmf: &PmfTable, r: f64, conv: TailConvention) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(domain(format!("tail radius must be nonnegative, got {r}")));
    }
    Ok(pmf.tail_sq(r * r * conv.time_param(pmf.steps())))
}

/// One row of a tail comparison: exact tail, the Gaussian comparison
/// `exp(-c r^2)`, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub n: usize,
    pub r: f64,
    pub exact_tail: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Exact tails over an `(n, r)` grid.
pub fn tail_table(
    dim: Dim,
    n_list: &[usize],
    r_list: &[f64],
    conv: TailConvention,
) -> Result<Vec<TailRow>> {
    let mut rows = Vec::with_capacity(n_list.len() * r_list.len());
    for &n in n_list {
        let pmf = PmfTable::build(conv.steps_for(n), dim);
        for &r in r_list {
            let exact_tail = tail_prob_with(&pmf, r, conv)?;
            let bound = (-conv.bound_rate() * r * r).exp();
            rows.push(TailRow {
                n,
                r,
                exact_tail,
                bound,
                ratio: exact_tail / bound,
            });
        }
    }
    Ok(rows)
}

/// Truncated local CLT series at `(n, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcltExpansion {
    pub n: u64,
    pub k: i64,
    pub order: u32,
    /// `sum_{l=1}^{N-1} k^{2l} / (l (2l-1) n^{2l-1})`.
    pub phi_partial: f64,
    /// `sqrt(1 / (pi n)) exp(-phi_partial)`, approximating `P(S(2n) = 2k)`.
    pub approx_prob: f64,
}

pub fn lclt_phi(n: u64, k: i64, order: u32) -> Result<LcltExpansion> {
    if n == 0 {
        return Err(domain("local CLT needs n >= 1"));
    }
    if k.unsigned_abs() > n {
        return Err(domain(format!("|k| = {} exceeds n = {n}", k.abs())));
    }
    if order < 2 {
        return Err(domain(format!(
            "truncation order must be >= 2, got {order}"
        )));
    }
    let nf = n as f64;
    let x2 = (k as f64 / nf).powi(2);
    let mut pow = 1.0;
    let mut phi_partial = 0.0;
    for l in 1..order {
        pow *= x2;
        let lf = l as f64;
        phi_partial += nf * pow / (lf * (2.0 * lf - 1.0));
    }
    let approx_prob = (1.0 / (std::f64::consts::PI * nf)).sqrt() * (-phi_partial).exp();
    Ok(LcltExpansion {
        n,
        k,
        order,
        phi_partial,
        approx_prob,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcltRow {
    pub n: u64,
    pub k: i64,
    pub exact: f64,
    pub approx: f64,
    pub rel_error: f64,
}

/// Relative error of the truncated series against the exact binomial.
#[derive(Debug, Clone, PartialEq)]
pub struct LcltProfile {
    pub n: u64,
    pub order: u32,
    pub rows: Vec<LcltRow>,
    /// `ln P(S(2n) = 2n) = -2n ln 2`, kept out of the rows.
    pub extreme_log_prob: f64,
}

impl LcltProfile {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }
}

/// Profile over `0 <= k <= k_max` (the law is symmetric in `k`); `|k| = n`
/// is excluded and reported through `extreme_log_prob`.
pub fn lclt_error_profile(n: u64, k_max: u64, order: u32) -> Result<LcltProfile> {
    if n < 2 {
        return Err(domain("error profile needs n >= 2"));
    }
    let pmf = exact_pmf_1d(2 * n as usize);
    let mut rows = Vec::new();
    for k in 0..=k_max.min(n - 1) as i64 {
        let e = lclt_phi(n, k, order)?;
        let exact = pmf.marginal_mass(2 * k);
        rows.push(LcltRow {
            n,
            k,
            exact,
            approx: e.approx_prob,
            rel_error: (e.approx_prob - exact).abs() / exact,
        });
    }
    Ok(LcltProfile {
        n,
        order,
        rows,
        extreme_log_prob: pmf.marginal_log_mass(2 * n as i64),
    })
}

/// Largest relative error over `|k| <= n^exponent`, for each `n`.
pub fn lclt_trend(ns: &[u64], exponent: f64, order: u32) -> Result<Vec<(u64, f64)>> {
    ns.iter()
        .map(|&n| {
            let k_max = (n as f64).powf(exponent).floor() as u64;
            Ok((n, lclt_error_profile(n, k_max, order)?.max_rel_error()))
        })
        .collect()
}

/// Empirical constant in `P(S(2n) = 2k) <= K exp(-k^2 / n) / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperRatio {
    pub constant: f64,
    pub argmax_n: u64,
    pub argmax_k: i64,
}

/// `max over 1 <= n <= n_max, |k| <= n` of `P(S(2n)=2k) sqrt(n) exp(k^2/n)`,
/// evaluated in log space.
pub fn lclt_upper_ratio(n_max: u64) -> Result<UpperRatio> {
    if n_max < 2 {
        return Err(domain("upper ratio scan needs n_max >= 2"));
    }
    let mut best = UpperRatio {
        constant: f64::NEG_INFINITY,
        argmax_n: 0,
        argmax_k: 0,
    };
    let mut best_log = f64::NEG_INFINITY;
    for n in 1..=n_max {
        let pmf = exact_pmf_1d(2 * n as usize);
        let nf = n as f64;
        for k in 0..=n as i64 {
            let kf = k as f64;
            let log_ratio = pmf.marginal_log_mass(2 * k) + 0.5 * nf.ln() + kf * kf / nf;
            if log_ratio > best_log {
                best_log = log_ratio;
                best.argmax_n = n;
                best.argmax_k = k;
            }
        }
    }
    best.constant = best_log.exp();
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: enumerate all 2^n step sequences.
    fn enumerate_1d(n: usize) -> Vec<(i64, f64)> {
        let mut counts = std::collections::BTreeMap::new();
        for bits in 0u32..(1 << n) {
            let s: i64 = (0..n)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .sum();
            *counts.entry(s).or_insert(0u64) += 1;
        }
        let total = (1u64 << n) as f64;
        counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total))
            .collect()
    }

    /// Brute force: enumerate all 4^n planar step sequences.
    fn enumerate_2d(n: usize) -> std::collections::HashMap<[i64; 2], f64> {
        let mut counts = std::collections::HashMap::new();
        for code in 0u64..(1 << (2 * n)) {
            let mut p = [0i64; 2];
            for i in 0..n {
                let [dx, dy] = crate::rng::UNIT_STEPS[(code >> (2 * i) & 3) as usize];
                p = [p[0] + dx, p[1] + dy];
            }
            *counts.entry(p).or_insert(0u64) += 1;
        }
        let total = (1u64 << (2 * n)) as f64;
        counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total))
            .collect()
    }

    #[test]
    fn small_1d_tables() {
        let t = exact_pmf_1d(2);
        assert_eq!(t.marginal_mass(0), 0.5);
        assert_eq!(t.marginal_mass(2), 0.25);
        assert_eq!(t.marginal_mass(-2), 0.25);
        assert_eq!(t.marginal_mass(1), 0.0);
        let t = exact_pmf_1d(4);
        assert!((t.marginal_mass(0) - 3.0 / 8.0).abs() < 1e-16);
        assert!((t.marginal_mass(2) - 0.25).abs() < 1e-16);
        assert!((t.marginal_mass(-4) - 1.0 / 16.0).abs() < 1e-16);
        let t = exact_pmf_1d(10);
        assert!((t.marginal_mass(10) - 0.5f64.powi(10)).abs() < 1e-18);
        assert!((t.marginal_mass(-10) - 0.5f64.powi(10)).abs() < 1e-18);
        let t = exact_pmf_1d(0);
        assert_eq!(t.marginal_mass(0), 1.0);
    }

    #[test]
    fn one_d_matches_enumeration() {
        for n in 0..=16 {
            let t = exact_pmf_1d(n);
            for (k, p) in enumerate_1d(n) {
                assert!((t.marginal_mass(k) - p).abs() <= 2e-16, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn two_d_matches_enumeration() {
        for n in 0..=8 {
            let t = exact_pmf_2d(n);
            let brute = enumerate_2d(n);
            let mut seen = 0;
            for (pt, m) in t.support() {
                let b = brute.get(&pt).copied().unwrap_or(0.0);
                assert!((m - b).abs() <= 1e-16, "n={n} {pt:?}");
                seen += (b > 0.0) as usize;
            }
            assert_eq!(seen, brute.len());
        }
        let t = exact_pmf_2d(1);
        for p in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert_eq!(t.mass(p), 0.25);
        }
        let t = exact_pmf_2d(2);
        assert_eq!(t.mass([0, 0]), 0.25);
        assert_eq!(t.mass([2, 0]), 1.0 / 16.0);
    }

    #[test]
    fn normalization_up_to_4000() {
        for n in [1usize, 7, 100, 513, 1000, 2047, 4000] {
            let t = exact_pmf_1d(n);
            assert!((t.total_mass() - 1.0).abs() < 1e-12, "n={n}");
            let t = exact_pmf_2d(n);
            assert!((t.total_mass() - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn symmetries() {
        let t = exact_pmf_2d(9);
        for (p, m) in t.support() {
            let [x, y] = p;
            for q in [
                [-x, y],
                [x, -y],
                [y, x],
                [-y, -x],
                [-x, -y],
                [y, -x],
                [-y, x],
            ] {
                assert!((t.mass(q) - m).abs() <= 1e-17);
            }
            assert_eq!((x + y).rem_euclid(2), 1);
        }
        let t = exact_pmf_1d(101);
        for k in 0..=101 {
            assert_eq!(t.marginal_mass(k), t.marginal_mass(-k));
        }
    }

    #[test]
    fn mean_square_identity_is_exact() {
        for n in [0usize, 1, 2, 5, 64, 333, 1000] {
            assert!((exact_pmf_2d(n).second_moment() - n as f64).abs() < 1e-9 * (n.max(1) as f64));
            assert!((exact_pmf_1d(n).second_moment() - n as f64).abs() < 1e-9 * (n.max(1) as f64));
        }
        // Same identity by streaming the full planar support.
        let t = exact_pmf_2d(200);
        let m: f64 = t
            .support()
            .map(|([x, y], p)| (x * x + y * y) as f64 * p)
            .sum();
        assert!((m - 200.0).abs() < 1e-9);
    }

    #[test]
    fn tail_examples() {
        let t = exact_pmf_1d(4);
        assert_eq!(tail_prob(&t, 0.0).unwrap(), 1.0);
        assert!((tail_prob(&t, 2.0).unwrap() - 1.0 / 8.0).abs() < 1e-16);
        assert!(tail_prob(&t, -1.0).is_err());
        // Boundary inclusion: |S(4)| >= 2 at r = 1 with the same-step pairing.
        let p = tail_prob_with(&t, 1.0, TailConvention::Same).unwrap();
        assert!((p - (0.25 + 0.25 + 1.0 / 16.0 + 1.0 / 16.0)).abs() < 1e-16);
    }

    #[test]
    fn planar_tail_matches_streamed_sum() {
        for (n, r) in [(10usize, 1.3), (21, 0.7), (40, 2.5), (7, 0.0)] {
            let t = exact_pmf_2d(n);
            let thr = r * r * n as f64 / 2.0;
            let brute: f64 = t
                .support()
                .filter(|([x, y], _)| (x * x + y * y) as f64 >= thr)
                .map(|(_, m)| m)
                .sum();
            assert!((tail_prob(&t, r).unwrap() - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn lclt_series_values() {
        let e = lclt_phi(100, 0, 2).unwrap();
        assert_eq!(e.phi_partial, 0.0);
        assert!((e.approx_prob - (1.0 / (100.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-16);
        assert!((lclt_phi(100, 10, 2).unwrap().phi_partial - 1.0).abs() < 1e-15);
        let p3 = lclt_phi(100, 10, 3).unwrap().phi_partial;
        assert!((p3 - (1.0 + 1e4 / 6e6)).abs() < 1e-15);
        assert!(lclt_phi(10, 11, 2).is_err());
        assert!(lclt_phi(10, 1, 1).is_err());
        assert!(lclt_phi(0, 0, 2).is_err());
        // Increasing in the order for k != 0.
        let mut prev = 0.0;
        for order in 2..8 {
            let p = lclt_phi(50, 20, order).unwrap().phi_partial;
            assert!(p >= prev && p >= 400.0 / 50.0);
            prev = p;
        }
    }

    #[test]
    fn lclt_profile_small_n() {
        let prof = lclt_error_profile(50, 0, 2).unwrap();
        assert!(prof.rows[0].rel_error < 0.02);
        // C(100,50) 2^-100 computed with an independent product.
        let exact: f64 = (1..=50).map(|i| (50 + i) as f64 / i as f64 / 4.0).product();
        assert!((prof.rows[0].exact - exact).abs() < 1e-15);
        assert!((prof.extreme_log_prob + 100.0 * 2f64.ln()).abs() < 1e-9);
        let prof = lclt_error_profile(5, 10, 2).unwrap();
        assert_eq!(prof.rows.len(), 5);
    }

    #[test]
    fn lclt_error_shrinks_with_n() {
        let trend = lclt_trend(&[100, 200, 400], 0.0, 2).unwrap();
        assert!(trend[0].1 > trend[1].1 && trend[1].1 > trend[2].1);
    }

    #[test]
    fn upper_ratio() {
        let r1 = lclt_upper_ratio(2).unwrap();
        assert!(r1.constant >= 0.5);
        let a = lclt_upper_ratio(500).unwrap();
        let b = lclt_upper_ratio(1000).unwrap();
        assert!(((a.constant - b.constant) / b.constant).abs() < 0.05);
        assert!(b.constant.is_finite());
    }
}
