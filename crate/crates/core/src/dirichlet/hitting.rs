//! Monte Carlo oracle: the solution at a point is the mean boundary value
//! seen by a walk started there and stopped on leaving the interior.

use super::RectangleSpec;
use crate::error::{domain, Result};
use crate::experiments::stats::{MeanEstimate, Moments, TailEstimate};
use crate::rng::{par_shards, StreamKey, DEFAULT_SHARD};

/// Step cap per walk.
pub const MC_STEP_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingEstimate {
    pub estimate: MeanEstimate,
    /// Walks stopped at [`MC_STEP_CAP`]; excluded from the estimate.
    pub capped: u64,
}

/// Estimates the solution at `point` from `samples` walks. For boundary
/// data in `{0, 1}` the interval is Wilson's; otherwise it is normal.
pub fn oracle_hitting_mc(
    spec: &RectangleSpec,
    point: [i64; 2],
    key: StreamKey,
    samples: u64,
) -> Result<HittingEstimate> {
    let [x0, y0] = point;
    if let Some(v) = spec.boundary_value(x0, y0) {
        return Ok(HittingEstimate {
            estimate: MeanEstimate::exact(v),
            capped: 0,
        });
    }
    if !spec.is_interior(x0, y0) {
        return Err(domain(format!("({x0}, {y0}) is outside the domain")));
    }
    if samples == 0 {
        return Err(domain("need at least one sample"));
    }
    let shards = par_shards(key, samples, DEFAULT_SHARD, |gen, count| {
        let mut m = Moments::default();
        let mut capped = 0u64;
        for _ in 0..count {
            let (mut x, mut y) = (x0, y0);
            let mut steps = 0u64;
            while spec.is_interior(x, y) {
                if steps == MC_STEP_CAP {
                    break;
                }
                let [dx, dy] = gen.walk_step_2d();
                x += dx;
                y += dy;
                steps += 1;
            }
            match spec.boundary_value(x, y) {
                Some(v) if !spec.is_interior(x, y) => m.push(v),
                _ => capped += 1,
            }
        }
        (m, capped)
    });
    let mut total = Moments::default();
    let mut capped = 0;
    for (m, c) in &shards {
        total.merge(m);
        capped += c;
    }
    if total.count == 0 {
        return Err(domain("every walk hit the step cap"));
    }
    let indicator = spec.phi.iter().all(|&v| v == 0.0 || v == 1.0);
    let estimate = if indicator {
        let t = TailEstimate::from_counts(total.sum.round() as u64, total.count);
        MeanEstimate {
            samples: total.count,
            mean: t.p_hat,
            std_err: t.std_err(),
            ci_lo: t.ci_lo,
            ci_hi: t.ci_hi,
        }
    } else {
        total.estimate()
    };
    Ok(HittingEstimate { estimate, capped })
}
