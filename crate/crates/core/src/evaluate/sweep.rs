//! Exact decoherence rates over a grid of angles and waiting times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::{exact_expected_coherence_with, EnumerationOptions};
use super::fit::fit_rate;
use super::policy::SignedFixed;
use super::scaled_rate;
use crate::bayes_maps::SensitivityPair;
use crate::rtp::RtpParams;

/// Fits with `R^2` at or below this are flagged.
pub const R_SQUARED_FLAG: f64 = 0.998;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub big_theta: f64,
    pub tau: f64,
    pub k_tau: f64,
    pub rate: f64,
    pub scaled_rate: f64,
    pub r_squared: f64,
    pub flagged: bool,
    /// Set when the cell could not be evaluated; the numbers are then NaN.
    pub error: Option<String>,
}

/// For every `(big_theta, tau)` pair, enumerates `n_steps` measurements of
/// the policy `theta = s * big_theta` with waiting time `tau`, then fits the
/// last `n_fit` points. Cells are returned row-major in `theta_grid`.
pub fn sweep_theta_tau(
    params: &RtpParams,
    sens: &SensitivityPair,
    theta_grid: &[f64],
    tau_grid: &[f64],
    n_steps: usize,
    n_fit: usize,
) -> Vec<SweepCell> {
    let cells: Vec<(f64, f64)> = theta_grid
        .iter()
        .flat_map(|&th| tau_grid.iter().map(move |&tau| (th, tau)))
        .collect();
    // parallelism comes from the cells; keep each enumeration serial
    let options = EnumerationOptions { split_depth: 0, ..Default::default() };
    cells
        .into_par_iter()
        .map(|(big_theta, tau)| {
            let policy = SignedFixed { big_theta, tau };
            let fitted = exact_expected_coherence_with(&policy, n_steps, params, sens, &options)
                .and_then(|e| fit_rate(&e.series, 0, Some(n_fit)));
            let k_tau = sens.k_big * tau;
            match fitted {
                Ok(fit) => SweepCell {
                    big_theta,
                    tau,
                    k_tau,
                    rate: fit.slope,
                    scaled_rate: scaled_rate(fit.slope, params, sens),
                    r_squared: fit.r_squared,
                    flagged: fit.r_squared <= R_SQUARED_FLAG,
                    error: None,
                },
                Err(e) => SweepCell {
                    big_theta,
                    tau,
                    k_tau,
                    rate: f64::NAN,
                    scaled_rate: f64::NAN,
                    r_squared: f64::NAN,
                    flagged: true,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
