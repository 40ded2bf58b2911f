//! Binomial and mean estimates with 95% intervals, and least squares.

use crate::error::{domain, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Monte Carlo proportion with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub successes: u64,
    pub samples: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl TailEstimate {
    pub fn from_counts(successes: u64, samples: u64) -> Self {
        assert!(samples > 0 && successes <= samples);
        let (ci_lo, ci_hi) = wilson_interval(successes, samples, Z95);
        Self {
            successes,
            samples,
            p_hat: successes as f64 / samples as f64,
            ci_lo,
            ci_hi,
        }
    }

    /// Binomial standard error `sqrt(p (1 - p) / N)` at the point estimate.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.samples as f64).sqrt()
    }

    /// Standard error evaluated at a reference probability `p`.
    pub fn std_err_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn covers(&self, p: f64) -> bool {
        self.ci_lo <= p && p <= self.ci_hi
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let hi = if k == n {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (lo, hi)
}

/// Sample mean with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub samples: u64,
    pub mean: f64,
    pub std_err: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl MeanEstimate {
    /// Exact value with no sampling error.
    pub fn exact(v: f64) -> Self {
        Self {
            samples: 0,
            mean: v,
            std_err: 0.0,
            ci_lo: v,
            ci_hi: v,
        }
    }
}

/// Streaming first and second moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn estimate(&self) -> MeanEstimate {
        let mean = self.mean();
        let se = self.std_err();
        MeanEstimate {
            samples: self.count,
            mean,
            std_err: se,
            ci_lo: mean - Z95 * se,
            ci_hi: mean + Z95 * se,
        }
    }
}

/// Ordinary least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when the fit is exact or `n = 2`.
    pub stderr: f64,
    pub r2: f64,
    pub points: usize,
}

pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(crate::Error::Shape {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(domain("least squares needs at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(domain("least squares needs finite points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * xs.iter().map(|x| x * x).sum::<f64>().max(1.0) {
        return Err(domain("degenerate x variance"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        stderr,
        r2,
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let e = TailEstimate::from_counts(0, 100);
        assert_eq!(e.p_hat, 0.0);
        assert_eq!(e.ci_lo, 0.0);
        assert!(e.ci_hi > 0.0);
        let e = TailEstimate::from_counts(50, 100);
        assert_eq!(e.p_hat, 0.5);
        // Wilson at z = 1.96: 0.5 -+ 1.96 sqrt(0.25/100 + 1.96^2/40000) / (1 + 1.96^2/100)
        assert!((e.ci_lo - 0.403831).abs() < 1e-5, "{}", e.ci_lo);
        assert!((e.ci_hi - 0.596169).abs() < 1e-5, "{}", e.ci_hi);
        let e = TailEstimate::from_counts(100, 100);
        assert_eq!(e.p_hat, 1.0);
        assert!(e.ci_lo < 1.0);
        assert_eq!(e.ci_hi, 1.0);
    }

    #[test]
    fn interval_contains_point() {
        for n in [1u64, 2, 10, 1000] {
            for k in 0..=n.min(50) {
                let e = TailEstimate::from_counts(k, n);
                assert!(
                    0.0 <= e.ci_lo && e.ci_lo <= e.p_hat && e.p_hat <= e.ci_hi && e.ci_hi <= 1.0
                );
            }
        }
    }

    #[test]
    fn fits() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = slope_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
        let ys = [0.0, 1.0, 5.0, 3.0];
        assert!(slope_fit(&xs, &ys).unwrap().r2 < 1.0);
        assert!(slope_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(slope_fit(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for v in [1.0, 2.0, 3.0, 4.0] {
            m.push(v);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
    }
}
