//! The policy interface used by the evaluators.

use crate::bayes_maps::{MeasurementSetting, SensitivityPair};
use crate::rtp::RtpParams;
use crate::strategies::{next_setting, PolicyState, StrategySpec, FIRST_ANGLE};
use crate::Result;

/// Anything that chooses measurement settings from the current state.
pub trait Policy: Sync {
    fn setting(&self, state: &PolicyState) -> Result<MeasurementSetting>;

    /// `false` for a policy that never measures.
    fn measures(&self) -> bool {
        true
    }

    /// The waiting time, when every step uses the same one.
    fn uniform_wait(&self) -> Option<f64>;

    /// Spacing of the common time grid used to average paths whose
    /// measurement times differ between records.
    fn grid_step(&self) -> f64;
}

/// A [`StrategySpec`] bound to its physical parameters.
#[derive(Clone, Copy, Debug)]
pub struct SpecPolicy {
    pub spec: StrategySpec,
    pub params: RtpParams,
    pub sens: SensitivityPair,
}

impl SpecPolicy {
    pub fn new(spec: StrategySpec, params: RtpParams, sens: SensitivityPair) -> Self {
        Self { spec, params, sens }
    }
}

impl Policy for SpecPolicy {
    fn setting(&self, state: &PolicyState) -> Result<MeasurementSetting> {
        next_setting(&self.spec, state, &self.params, &self.sens)
    }

    fn measures(&self) -> bool {
        !matches!(self.spec, StrategySpec::NoControl)
    }

    fn uniform_wait(&self) -> Option<f64> {
        let waits = self.spec.waiting_times(self.sens.k_big)?;
        waits.iter().all(|&w| w == waits[0]).then_some(waits[0])
    }

    fn grid_step(&self) -> f64 {
        match self.spec.waiting_times(self.sens.k_big) {
            Some(w) => w.into_iter().fold(f64::INFINITY, f64::min),
            None => 1.0 / self.sens.k_big,
        }
    }
}

/// `theta = s * big_theta` with a waiting time chosen independently of the
/// angle; the policy family scanned by the parameter sweep.
#[derive(Clone, Copy, Debug)]
pub struct SignedFixed {
    pub big_theta: f64,
    pub tau: f64,
}

impl Policy for SignedFixed {
    fn setting(&self, state: &PolicyState) -> Result<MeasurementSetting> {
        let theta = if state.step == 0 { FIRST_ANGLE } else { state.vector.sign() * self.big_theta };
        MeasurementSetting::new(theta, self.tau)
    }

    fn uniform_wait(&self) -> Option<f64> {
        Some(self.tau)
    }

    fn grid_step(&self) -> f64 {
        self.tau
    }
}
