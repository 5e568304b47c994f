use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-number summary plus mean.
///
/// Quartiles interpolate linearly between the closest ranks: for sorted
/// samples `x[0..n]` the `p`-quantile sits at position `h = (n - 1) p` and
/// is `x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn boxplot_stats(samples: &[f64]) -> Result<BoxplotStats> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(BoxplotStats {
        min,
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max,
        // summation rounding can leave the mean an ulp outside the range
        mean: mean.clamp(min, max),
    })
}
