//! Four-state approximation of the steady decoherence rate.
//!
//! After a transient the state spends almost all its time in one of two
//! stable eigenstates (one per sign of `zeta`) or in the state just after a
//! non-null result. Mirror symmetry of equal jump rates folds these into
//! two classes, `>` (the eigenstate) and `<` (just after a jump), with
//! occupation probabilities from a scalar balance equation.

use crate::bayes_maps::{HTriple, Outcome, SensitivityPair};
use crate::rtp::RtpParams;
use crate::state::{apply_real, complex_coherence, CoherenceVector};
use crate::strategies::StrategySpec;
use crate::{Error, Result};

use super::eigen::stable_eigenstate;

/// Closed-form decoherence rate of a reduced policy with equal jump rates.
pub fn gamma_4state(spec: &StrategySpec, params: &RtpParams, sens: &SensitivityPair) -> Result<f64> {
    if !params.is_symmetric() {
        return Err(Error::Unsupported("the four-state rate needs equal jump rates".into()));
    }
    spec.validate()?;
    let g = spec
        .as_greedy4()
        .ok_or_else(|| Error::Unsupported(format!("no four-state form for {}", spec.name())))?;
    let k = sens.k_big;
    let (tau_gt, tau_lt) = (g.delta_gt / k, g.delta_lt / k);
    // `>` maps use +theta_gt and `<` maps -theta_lt; mirror images cover the rest
    let gt = HTriple::new(params, sens, tau_gt);
    let lt = HTriple::new(params, sens, tau_lt);
    let probe = sens.probability_limit();
    let gt_check = HTriple::new(params, &probe, tau_gt);
    let lt_check = HTriple::new(params, &probe, tau_lt);
    let (th_gt, th_lt) = (g.theta_gt, -g.theta_lt);

    let normalized = |v: [crate::C64; 2]| {
        let sum = v[0] + v[1];
        CoherenceVector::new(v[0] / sum, v[1] / sum)
    };
    let (r, _) = stable_eigenstate(&gt.f(th_gt, Outcome::Null))?;
    let l = normalized(gt.f(th_gt, Outcome::NonNull).apply(r.as_array()));

    let (r_check, _) = stable_eigenstate(&gt_check.f(th_gt, Outcome::Null))?;
    let r_check = [r_check.plus.re, r_check.minus.re];
    let l_check = apply_real(&gt_check.f(th_gt, Outcome::NonNull).re(), r_check);
    let l_check = [l_check[0] / (l_check[0] + l_check[1]), l_check[1] / (l_check[0] + l_check[1])];

    let total = |v: [f64; 2]| v[0] + v[1];
    let q_r = total(apply_real(&gt_check.f(th_gt, Outcome::Null).re(), r_check));
    let q_l = total(apply_real(&lt_check.f(th_lt, Outcome::Null).re(), l_check));
    let p_gt = q_l / (1.0 - q_r + q_l);
    let p_lt = 1.0 - p_gt;

    let kept: f64 = Outcome::BOTH
        .iter()
        .map(|&y| {
            let from_r = complex_coherence(&CoherenceVector::from_array(gt.f(th_gt, y).apply(r.as_array())));
            let from_l = complex_coherence(&CoherenceVector::from_array(lt.f(th_lt, y).apply(l.as_array())));
            (from_r * p_gt).norm() + (from_l * p_lt).norm()
        })
        .sum();
    Ok((1.0 - kept) / (p_gt * tau_gt + p_lt * tau_lt))
}
