//! Straight-line fits of decoherence against time.

use serde::{Deserialize, Serialize};

use super::CoherenceSeries;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Decoherence rate, the slope of `1 - C` against time.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_discarded: usize,
    /// Set when the data has no variance, so `r_squared` is meaningless.
    pub degenerate: bool,
}

/// Least-squares line through `(t, 1 - C)` after dropping the first
/// `n_discard` points and, optionally, keeping only the last `use_last`.
pub fn fit_rate(series: &CoherenceSeries, n_discard: usize, use_last: Option<usize>) -> Result<RateFit> {
    let total = series.len();
    let mut start = n_discard.min(total);
    if let Some(m) = use_last {
        start = start.max(total.saturating_sub(m));
    }
    let t = &series.times[start..];
    let d: Vec<f64> = series.values[start..].iter().map(|c| 1.0 - c).collect();
    let n = t.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mean_t = t.iter().sum::<f64>() / nf;
    let mean_d = d.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in t.iter().zip(&d) {
        let (dx, dy) = (x - mean_t, y - mean_d);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit times are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_d - slope * mean_t;
    let (r_squared, degenerate) = if syy == 0.0 {
        (0.0, true)
    } else {
        let ss_res: f64 = t
            .iter()
            .zip(&d)
            .map(|(x, y)| {
                let e = y - (intercept + slope * x);
                e * e
            })
            .sum();
        ((1.0 - ss_res / syy).clamp(0.0, 1.0), false)
    };
    Ok(RateFit { slope, intercept, r_squared, n_discarded: start, degenerate })
}
