//! Coherence without any spectator control.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bayes_maps::h_matrix;
use crate::rtp::{steady_state, RtpParams};
use crate::state::{complex_coherence, CoherenceVector};

/// Complex coherence `I^T H(t, kappa) P_ss` of an unmonitored data qubit.
pub fn nc_amplitude(params: &RtpParams, kappa: f64, t: f64) -> C64 {
    let a0 = CoherenceVector::from_probabilities(steady_state(params));
    let a = h_matrix(params, t, kappa).apply(a0.as_array());
    complex_coherence(&CoherenceVector::from_array(a))
}

pub fn coherence_nc(params: &RtpParams, kappa: f64, t: f64) -> f64 {
    nc_amplitude(params, kappa, t).norm()
}

/// Long-time decay (`gamma`) and phase drift (`omega`) rates without control.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcRates {
    pub gamma: f64,
    pub omega: f64,
}

pub fn asymptotic_nc_rates(params: &RtpParams, kappa: f64) -> NcRates {
    let bar = params.gamma_bar();
    NcRates {
        gamma: kappa * kappa * params.gamma_breve() / (2.0 * bar * bar),
        omega: kappa * (params.gamma_up() - params.gamma_down()) / (2.0 * bar),
    }
}
