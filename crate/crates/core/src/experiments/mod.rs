//! Estimators, fits and the named verification suites.
//!
//! Statements with unspecified constants are checked by fitting the
//! constant: [`BoundCheck`] fits it on half of a parameter grid and passes
//! when every ratio on the full grid stays within the tolerance of it.

pub mod stats;
pub mod suite;
pub mod tails;

pub use stats::{slope_fit, wilson_interval, LinearFit, MeanEstimate, Moments, TailEstimate, Z95};
pub use suite::{
    oracle_sweep, run_once, run_suite, Check, SuiteConfig, SuiteReport, BASE_SAMPLES, DEFAULT_SEED,
    LEMMA_IDS,
};
pub use tails::{
    bm_mean_square, check_bm_tails, check_reflection, check_rw_tails, estimate, small_ball,
    small_ball_fit, walk_mean_square, BmTailReport, EndpointRow, Process, ReflectionReport,
    ReflectionRow, SmallBallEstimate, SmallBallReport, Splitting,
};

use crate::table::Table;

/// One grid point of a bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub n: usize,
    pub param: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Ratios `lhs / rhs` over an `(n, param)` grid and their fitted constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub lemma: String,
    pub rows: Vec<BoundRow>,
    /// Largest ratio over the half grid: every other `n` and every other
    /// parameter, starting from the first.
    pub constant: f64,
    /// Largest ratio over the full grid.
    pub full_constant: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundCheck {
    /// Builds the check from `(n, param, lhs, rhs)` tuples on the product
    /// grid `n_list x params`.
    pub fn fit(
        lemma: &str,
        n_list: &[usize],
        params: &[f64],
        points: Vec<(usize, f64, f64, f64)>,
        tolerance: f64,
    ) -> Self {
        let half_n: Vec<usize> = n_list.iter().step_by(2).copied().collect();
        let half_p: Vec<f64> = params.iter().step_by(2).copied().collect();
        let rows: Vec<BoundRow> = points
            .into_iter()
            .map(|(n, param, lhs, rhs)| BoundRow {
                n,
                param,
                lhs,
                rhs,
                ratio: lhs / rhs,
            })
            .collect();
        let max_of = |it: &mut dyn Iterator<Item = &BoundRow>| {
            it.map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
        };
        let constant = max_of(
            &mut rows
                .iter()
                .filter(|r| half_n.contains(&r.n) && half_p.contains(&r.param)),
        );
        let full_constant = max_of(&mut rows.iter());
        let pass =
            constant.is_finite() && rows.iter().all(|r| r.ratio <= constant * (1.0 + tolerance));
        Self {
            lemma: lemma.to_string(),
            rows,
            constant,
            full_constant,
            tolerance,
            pass,
        }
    }

    /// Relative change of the constant from the half grid to the full grid.
    pub fn variation(&self) -> f64 {
        self.full_constant / self.constant - 1.0
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "param", "lhs", "rhs", "ratio"]);
        for r in &self.rows {
            t.push(crate::row![r.n, r.param, r.lhs, r.rhs, r.ratio]);
        }
        t
    }
}
