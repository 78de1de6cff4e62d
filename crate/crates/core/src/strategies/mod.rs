//! Measurement policies. Every policy maps the current coherence vector to
//! the next measurement setting through [`next_setting`].

mod extract;
mod greedy;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::bayes_maps::{MeasurementSetting, SensitivityPair};
use crate::rtp::RtpParams;
use crate::state::{alpha, CoherenceVector};
use crate::{Error, Result};

pub use extract::{extract_greedy4_params, tau_effective, two_means, GreedyStep};
pub use greedy::{
    berry_wiseman_candidates, best_one_measurement, greedy_full_next_setting,
    greedy_scenario_rewards, one_measurement_reward, scenario_difference, BwTerms,
    ScenarioRewards, DEFAULT_DT_SCALED,
};

/// Angle of the very first measurement of every adaptive policy. With no
/// information yet there is no preferred sign.
pub const FIRST_ANGLE: f64 = FRAC_PI_2;

/// Constants of the four-parameter reduced Greedy policy. `gt` entries apply
/// when `alpha > alpha_threshold`, `lt` entries otherwise. Waiting times are
/// stored scaled, `delta = K tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Greedy4Params {
    pub theta_gt: f64,
    pub theta_lt: f64,
    pub delta_gt: f64,
    pub delta_lt: f64,
    pub alpha_threshold: f64,
}

impl Greedy4Params {
    /// Angle and scaled wait for a given `alpha`.
    pub fn branch(&self, alpha: f64) -> (f64, f64) {
        if alpha > self.alpha_threshold {
            (self.theta_gt, self.delta_gt)
        } else {
            (self.theta_lt, self.delta_lt)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// No spectator measurements at all.
    NoControl,
    /// Fixed angle and waiting time.
    NonAdaptive { theta: f64, tau: f64 },
    /// `theta = s * big_theta`, `tau = big_theta / K`.
    ThetaFamily { big_theta: f64 },
    /// Local optimization at every step. `dt_scan` defaults to `0.001 / K`.
    GreedyFull {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt_scan: Option<f64>,
    },
    Greedy4(Greedy4Params),
    /// Greedy4 with the waits tied to the angles.
    Greedy2 { theta_gt: f64, theta_lt: f64, alpha_threshold: f64 },
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::NoControl => "no_control",
            StrategySpec::NonAdaptive { .. } => "non_adaptive",
            StrategySpec::ThetaFamily { .. } => "theta_family",
            StrategySpec::GreedyFull { .. } => "greedy_full",
            StrategySpec::Greedy4(_) => "greedy4",
            StrategySpec::Greedy2 { .. } => "greedy2",
        }
    }

    pub fn is_adaptive(&self) -> bool {
        !matches!(self, StrategySpec::NoControl | StrategySpec::NonAdaptive { .. })
    }

    /// The reduced policies as Greedy4 parameters, if they fit that form.
    pub fn as_greedy4(&self) -> Option<Greedy4Params> {
        match *self {
            StrategySpec::ThetaFamily { big_theta } => Some(Greedy4Params {
                theta_gt: big_theta,
                theta_lt: big_theta,
                delta_gt: big_theta,
                delta_lt: big_theta,
                alpha_threshold: 0.0,
            }),
            StrategySpec::Greedy4(p) => Some(p),
            StrategySpec::Greedy2 { theta_gt, theta_lt, alpha_threshold } => Some(Greedy4Params {
                theta_gt,
                theta_lt,
                delta_gt: theta_gt,
                delta_lt: theta_lt,
                alpha_threshold,
            }),
            _ => None,
        }
    }

    /// Every waiting time this policy can choose, if the set is finite.
    pub fn waiting_times(&self, k_big: f64) -> Option<Vec<f64>> {
        match *self {
            StrategySpec::NoControl => Some(vec![1.0 / k_big]),
            StrategySpec::NonAdaptive { tau, .. } => Some(vec![tau]),
            StrategySpec::GreedyFull { .. } => None,
            _ => {
                let p = self.as_greedy4().expect("reduced policy");
                Some(vec![p.delta_gt / k_big, p.delta_lt / k_big])
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let angle = |name: &str, v: f64| {
            if v > 0.0 && v < PI {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must lie in (0, pi), got {v}")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        match *self {
            StrategySpec::NoControl => Ok(()),
            StrategySpec::NonAdaptive { theta, tau } => {
                angle("theta", theta)?;
                positive("tau", tau)
            }
            StrategySpec::ThetaFamily { big_theta } => angle("big_theta", big_theta),
            StrategySpec::GreedyFull { dt_scan } => match dt_scan {
                Some(dt) => positive("dt_scan", dt),
                None => Ok(()),
            },
            StrategySpec::Greedy4(p) => {
                angle("theta_gt", p.theta_gt)?;
                angle("theta_lt", p.theta_lt)?;
                positive("delta_gt", p.delta_gt)?;
                positive("delta_lt", p.delta_lt)?;
                finite("alpha_threshold", p.alpha_threshold)
            }
            StrategySpec::Greedy2 { theta_gt, theta_lt, alpha_threshold } => {
                angle("theta_gt", theta_gt)?;
                angle("theta_lt", theta_lt)?;
                finite("alpha_threshold", alpha_threshold)
            }
        }
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite")))
    }
}

/// What a policy sees before choosing measurement `step + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyState {
    /// Number of measurements already made.
    pub step: usize,
    pub vector: CoherenceVector,
}

/// The setting for the next measurement.
///
/// `NoControl` never measures; it returns angle zero and the bookkeeping
/// interval `1 / K` at which its coherence is sampled.
pub fn next_setting(
    spec: &StrategySpec,
    state: &PolicyState,
    params: &RtpParams,
    sens: &SensitivityPair,
) -> Result<MeasurementSetting> {
    let k = sens.k_big;
    let s = state.vector.sign();
    let (theta, tau) = match *spec {
        StrategySpec::NoControl => (0.0, 1.0 / k),
        StrategySpec::NonAdaptive { theta, tau } => (theta, tau),
        StrategySpec::ThetaFamily { big_theta } => (s * big_theta, big_theta / k),
        StrategySpec::GreedyFull { dt_scan } => {
            let chosen = greedy_full_next_setting(&state.vector, params, sens, dt_scan)?;
            (chosen.theta, chosen.tau)
        }
        StrategySpec::Greedy4(_) | StrategySpec::Greedy2 { .. } => {
            let p = spec.as_greedy4().expect("reduced policy");
            let (angle, delta) = p.branch(alpha(&state.vector, sens)?);
            (s * angle, delta / k)
        }
    };
    let theta = if state.step == 0 && spec.is_adaptive() { FIRST_ANGLE } else { theta };
    MeasurementSetting::new(theta, tau)
}
