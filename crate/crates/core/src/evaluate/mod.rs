//! Quantitative outputs: expected coherence, decoherence rates, eigenstate
//! analysis and parameter sweeps.

mod baseline;
mod closed_form;
mod eigen;
mod enumerate;
mod fit;
mod montecarlo;
mod policy;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::bayes_maps::SensitivityPair;
use crate::rtp::RtpParams;

pub use baseline::{asymptotic_nc_rates, coherence_nc, nc_amplitude, NcRates};
pub use closed_form::gamma_4state;
pub use eigen::{
    eigenstate_stats_asymptotic, gamma_bar_theta, h_theta, minimize_h_theta, stable_eigenstate,
};
pub use enumerate::{
    exact_expected_coherence, exact_expected_coherence_with, Enumeration, EnumerationOptions,
};
pub use fit::{fit_rate, RateFit};
pub use montecarlo::{
    monte_carlo_expected_coherence, monte_carlo_expected_coherence_with, monte_carlo_trajectory,
    monte_carlo_trajectory_with, trajectory_rng, McEstimate, McTrajectory, PhasePoint,
};
pub use policy::{Policy, SignedFixed, SpecPolicy};
pub use sweep::{sweep_theta_tau, SweepCell, R_SQUARED_FLAG};

/// Expected coherence sampled at increasing times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CoherenceSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `1 - C` at every time.
    pub fn decoherence(&self) -> Vec<f64> {
        self.values.iter().map(|c| 1.0 - c).collect()
    }
}

/// Rate in units of `gamma_breve kappa^2 / (2 K^2)`, the natural scale of
/// the adaptive policies.
pub fn scaled_rate(rate: f64, params: &RtpParams, sens: &SensitivityPair) -> f64 {
    rate * 2.0 * sens.k_big * sens.k_big / (params.gamma_breve() * sens.kappa * sens.kappa)
}

/// Linear interpolation of a path `(times, values)` at `t`, assuming
/// `times[0] <= t <= times[last]`; `hint` is advanced monotonically.
pub(crate) fn interpolate(times: &[f64], values: &[f64], t: f64, hint: &mut usize) -> f64 {
    while *hint + 1 < times.len() && times[*hint + 1] < t {
        *hint += 1;
    }
    if *hint + 1 >= times.len() || times[*hint] == t {
        return values[*hint];
    }
    let (t0, t1) = (times[*hint], times[*hint + 1]);
    let (v0, v1) = (values[*hint], values[*hint + 1]);
    if t >= t1 {
        return v1;
    }
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}
