//! Seedable, splittable random streams.
//!
//! A stream is identified by a [`StreamKey`] `(seed, stream_index)`. The
//! backing generator is ChaCha8, whose 64-bit stream selector gives O(1)
//! access to any stream without coordination between workers. Output is a
//! pure function of the key, independent of platform and thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub stream_index: u64,
}

impl StreamKey {
    pub const fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    /// Key of the `k`-th sibling stream after this one.
    pub const fn offset(self, k: u64) -> Self {
        Self {
            seed: self.seed,
            stream_index: self.stream_index.wrapping_add(k),
        }
    }

    /// Key for a sub-experiment: moves the stream index into a disjoint
    /// block of 2^32 streams tagged by `tag`.
    pub const fn block(self, tag: u32) -> Self {
        Self {
            seed: self.seed,
            stream_index: self.stream_index.wrapping_add((tag as u64) << 32),
        }
    }
}

/// What to draw from a [`Generator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawKind {
    Uniform01,
    StandardGaussian,
    WalkStep1d,
    WalkStep2d,
}

/// Result of [`Generator::draw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Draw {
    Real(f64),
    Step1d(i64),
    Step2d([i64; 2]),
}

/// The four unit steps of the square lattice.
pub const UNIT_STEPS: [[i64; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

/// A single-owner random generator bound to one stream.
#[derive(Debug, Clone)]
pub struct Generator {
    inner: ChaCha8Rng,
    bits: u64,
    bits_left: u32,
}

/// Builds the generator for `key`.
pub fn make_stream(key: StreamKey) -> Generator {
    let mut inner = ChaCha8Rng::seed_from_u64(key.seed);
    inner.set_stream(key.stream_index);
    Generator {
        inner,
        bits: 0,
        bits_left: 0,
    }
}

impl Generator {
    pub fn next_word(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`; safe to take a logarithm of.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn standard_gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    #[inline]
    fn take_bits(&mut self, n: u32) -> u64 {
        if self.bits_left < n {
            self.bits = self.inner.next_u64();
            self.bits_left = 64;
        }
        let out = self.bits & ((1u64 << n) - 1);
        self.bits >>= n;
        self.bits_left -= n;
        out
    }

    /// Uniform on `{-1, +1}`.
    #[inline]
    pub fn walk_step_1d(&mut self) -> i64 {
        (self.take_bits(1) as i64) * 2 - 1
    }

    /// Uniform on the four unit lattice steps.
    #[inline]
    pub fn walk_step_2d(&mut self) -> [i64; 2] {
        UNIT_STEPS[self.take_bits(2) as usize]
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Lemire's multiply-shift with rejection of the biased zone.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = (self.inner.next_u64() as u128) * (bound as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn draw(&mut self, kind: DrawKind) -> Draw {
        match kind {
            DrawKind::Uniform01 => Draw::Real(self.uniform01()),
            DrawKind::StandardGaussian => Draw::Real(self.standard_gaussian()),
            DrawKind::WalkStep1d => Draw::Step1d(self.walk_step_1d()),
            DrawKind::WalkStep2d => Draw::Step2d(self.walk_step_2d()),
        }
    }

    /// Access for samplers from `rand_distr`.
    pub fn raw(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// Default number of samples handled by one stream in sharded runs.
pub const DEFAULT_SHARD: u64 = 4096;

/// Splits `samples` into consecutive shards of `shard_size`, runs `work` on
/// each shard with its own stream `key.offset(shard)`, and returns the
/// per-shard results in shard order. The output does not depend on the
/// number of worker threads.
pub fn par_shards<T, F>(key: StreamKey, samples: u64, shard_size: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Generator, u64) -> T + Sync,
{
    let shard_size = shard_size.max(1);
    let shards = samples.div_ceil(shard_size);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = shard_size.min(samples - s * shard_size);
            let mut gen = make_stream(key.offset(s));
            work(&mut gen, count)
        })
        .collect()
}

/// Runs `work` once per replicate, each replicate on its own stream.
pub fn par_replicates<T, F>(key: StreamKey, replicates: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Generator, u64) -> T + Sync,
{
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut gen = make_stream(key.offset(r));
            work(&mut gen, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(key: StreamKey, n: usize) -> Vec<u64> {
        let mut g = make_stream(key);
        (0..n).map(|_| g.next_word()).collect()
    }

    #[test]
    fn same_key_same_sequence() {
        let k = StreamKey::new(1, 0);
        assert_eq!(words(k, 64), words(k, 64));
    }

    #[test]
    fn sibling_streams_differ_from_first_word() {
        let a = words(StreamKey::new(1, 0), 4);
        let b = words(StreamKey::new(1, 1), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_ne!(x, y);
        }
    }

    #[test]
    fn frozen_first_words() {
        // Recorded once from the generator; guards cross-platform stability.
        assert_eq!(words(StreamKey::new(1, 0), 4), FROZEN_1_0);
        assert_eq!(words(StreamKey::new(1, 1), 4), FROZEN_1_1);
    }

    const FROZEN_1_0: [u64; 4] = [
        7424550030962593201,
        1482817706323250795,
        11004592982271133285,
        4045824405258374466,
    ];
    const FROZEN_1_1: [u64; 4] = [
        15715005604373573095,
        939185832570518534,
        10307165283572921510,
        1854555920053791047,
    ];

    #[test]
    fn zero_seed_is_valid() {
        let w = words(StreamKey::new(0, 0), 8);
        assert!(w.iter().any(|&x| x != 0));
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut g = make_stream(StreamKey::new(3, 0));
        for _ in 0..100_000 {
            let u = g.uniform01();
            assert!((0.0..1.0).contains(&u));
            let v = g.uniform_open0();
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn walk_step_2d_frequencies() {
        let mut g = make_stream(StreamKey::new(5, 0));
        let mut counts = [0u64; 4];
        let n = 1_000_000;
        for _ in 0..n {
            let s = g.walk_step_2d();
            let i = UNIT_STEPS.iter().position(|u| *u == s).unwrap();
            counts[i] += 1;
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((f - 0.25).abs() < 0.002, "frequency {f}");
        }
    }

    #[test]
    fn walk_step_1d_is_pm_one() {
        let mut g = make_stream(StreamKey::new(5, 1));
        let mut plus = 0;
        for _ in 0..100_000 {
            let s = g.walk_step_1d();
            assert!(s == 1 || s == -1);
            plus += (s == 1) as u64;
        }
        assert!((plus as f64 / 1e5 - 0.5).abs() < 0.005);
    }

    #[test]
    fn gaussian_variance() {
        let mut g = make_stream(StreamKey::new(7, 0));
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = g.standard_gaussian();
            s += z;
            s2 += z * z;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005);
        assert!((0.995..=1.005).contains(&var), "variance {var}");
    }

    #[test]
    fn below_is_in_range() {
        let mut g = make_stream(StreamKey::new(9, 0));
        for b in [1u64, 2, 3, 7, 1000] {
            for _ in 0..1000 {
                assert!(g.below(b) < b);
            }
        }
    }

    #[test]
    fn streams_pass_pair_independence_chi_square() {
        // 4x4 contingency table of quantized uniforms from streams 0 and 1.
        let mut a = make_stream(StreamKey::new(11, 0));
        let mut b = make_stream(StreamKey::new(11, 1));
        let n = 100_000;
        let mut table = [[0f64; 4]; 4];
        for _ in 0..n {
            let i = (a.uniform01() * 4.0) as usize;
            let j = (b.uniform01() * 4.0) as usize;
            table[i][j] += 1.0;
        }
        let expected = n as f64 / 16.0;
        let chi2: f64 = table
            .iter()
            .flatten()
            .map(|&o| (o - expected).powi(2) / expected)
            .sum();
        // 15 degrees of freedom, upper 1% point.
        assert!(chi2 < 30.578, "chi2 {chi2}");
    }

    #[test]
    fn shard_results_are_ordered_and_deterministic() {
        let key = StreamKey::new(2, 100);
        let run = || par_shards(key, 10_000, 1000, |g, c| (c, g.next_word()));
        let a = run();
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|(c, _)| *c == 1000));
        assert_eq!(a, run());
        let odd = par_shards(key, 2500, 1000, |_, c| c);
        assert_eq!(odd, vec![1000, 1000, 500]);
    }
}
