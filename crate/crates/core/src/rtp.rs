//! Two-state random telegraph process.
//!
//! The noise `z(t)` takes the values `+1` and `-1`. It flips from `+1` to `-1`
//! at rate `gamma_down` and from `-1` to `+1` at rate `gamma_up`. Two-vectors
//! are ordered `(z = +1, z = -1)` throughout the crate.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Real 2x2 matrix, indexed `[row][column]`.
pub type Matrix2 = [[f64; 2]; 2];

/// Jump rates of the telegraph process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRates", into = "RawRates")]
pub struct RtpParams {
    gamma_up: f64,
    gamma_down: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRates {
    gamma_up: f64,
    gamma_down: f64,
}

impl TryFrom<RawRates> for RtpParams {
    type Error = Error;
    fn try_from(raw: RawRates) -> Result<Self> {
        RtpParams::new(raw.gamma_up, raw.gamma_down)
    }
}

impl From<RtpParams> for RawRates {
    fn from(p: RtpParams) -> Self {
        RawRates { gamma_up: p.gamma_up, gamma_down: p.gamma_down }
    }
}

impl RtpParams {
    pub fn new(gamma_up: f64, gamma_down: f64) -> Result<Self> {
        if !(gamma_up.is_finite() && gamma_up > 0.0) {
            return Err(Error::InvalidParameter("gamma_up must be > 0".into()));
        }
        if !(gamma_down.is_finite() && gamma_down > 0.0) {
            return Err(Error::InvalidParameter("gamma_down must be > 0".into()));
        }
        Ok(Self { gamma_up, gamma_down })
    }

    /// Equal rates in both directions.
    pub fn symmetric(gamma: f64) -> Result<Self> {
        Self::new(gamma, gamma)
    }

    /// Rate of `-1 -> +1` flips.
    pub fn gamma_up(&self) -> f64 {
        self.gamma_up
    }

    /// Rate of `+1 -> -1` flips.
    pub fn gamma_down(&self) -> f64 {
        self.gamma_down
    }

    /// Arithmetic mean of the two rates.
    pub fn gamma_bar(&self) -> f64 {
        0.5 * (self.gamma_up + self.gamma_down)
    }

    /// Harmonic mean of the two rates.
    pub fn gamma_breve(&self) -> f64 {
        2.0 * self.gamma_up * self.gamma_down / (self.gamma_up + self.gamma_down)
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma_up == self.gamma_down
    }

    /// Rate at which the process leaves the value `z`.
    fn exit_rate(&self, z: i8) -> f64 {
        if z > 0 {
            self.gamma_down
        } else {
            self.gamma_up
        }
    }
}

/// Generator of the master equation `dp/dt = J p`.
pub fn jump_matrix(params: &RtpParams) -> Matrix2 {
    let (up, down) = (params.gamma_up, params.gamma_down);
    [[-down, up], [down, -up]]
}

/// Evolves a probability vector for a time `tau` using the closed-form
/// exponential of the generator.
pub fn propagate(params: &RtpParams, p: [f64; 2], tau: f64) -> [f64; 2] {
    let two_bar = 2.0 * params.gamma_bar();
    let weight = -(-two_bar * tau).exp_m1() / two_bar;
    let j = jump_matrix(params);
    [
        p[0] + weight * (j[0][0] * p[0] + j[0][1] * p[1]),
        p[1] + weight * (j[1][0] * p[0] + j[1][1] * p[1]),
    ]
}

pub fn steady_state(params: &RtpParams) -> [f64; 2] {
    let two_bar = 2.0 * params.gamma_bar();
    [params.gamma_up / two_bar, params.gamma_down / two_bar]
}

/// One realization of `z(t)` on `[0, horizon]`, stored as its jump times.
#[derive(Clone, Debug, PartialEq)]
pub struct RtpTrajectory {
    z0: i8,
    jump_times: Vec<f64>,
    horizon: f64,
}

impl RtpTrajectory {
    pub fn new(z0: i8, jump_times: Vec<f64>, horizon: f64) -> Result<Self> {
        if z0 != 1 && z0 != -1 {
            return Err(Error::InvalidParameter("z0 must be +1 or -1".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon must be > 0".into()));
        }
        let ordered = jump_times.windows(2).all(|w| w[0] < w[1]);
        let inside = jump_times.iter().all(|&t| t > 0.0 && t <= horizon);
        if !ordered || !inside {
            return Err(Error::InvalidParameter(
                "jump times must be strictly increasing within (0, horizon]".into(),
            ));
        }
        Ok(Self { z0, jump_times, horizon })
    }

    pub fn z0(&self) -> i8 {
        self.z0
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Value of the noise at time `t`, right-continuous at jumps.
    pub fn value_at(&self, t: f64) -> i8 {
        let flips = self.jump_times.partition_point(|&j| j <= t);
        if flips % 2 == 0 {
            self.z0
        } else {
            -self.z0
        }
    }

    pub fn final_value(&self) -> i8 {
        self.value_at(self.horizon)
    }
}

/// Draws a trajectory with exponential holding times.
pub fn sample_trajectory<R: Rng + ?Sized>(
    params: &RtpParams,
    z0: i8,
    horizon: f64,
    rng: &mut R,
) -> Result<RtpTrajectory> {
    if z0 != 1 && z0 != -1 {
        return Err(Error::InvalidParameter("z0 must be +1 or -1".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon must be > 0".into()));
    }
    let leave_plus = Exp::new(params.exit_rate(1)).expect("rate is positive");
    let leave_minus = Exp::new(params.exit_rate(-1)).expect("rate is positive");
    let mut jumps = Vec::new();
    let mut z = z0;
    let mut t = 0.0;
    loop {
        let hold = if z > 0 { leave_plus.sample(rng) } else { leave_minus.sample(rng) };
        t += hold;
        if t > horizon {
            break;
        }
        // a zero holding time would duplicate a jump time
        if jumps.last().is_some_and(|&last| t <= last) || t <= 0.0 {
            continue;
        }
        jumps.push(t);
        z = -z;
    }
    Ok(RtpTrajectory { z0, jump_times: jumps, horizon })
}

/// Accumulated noise `x = integral of z(s) ds` over `[t1, t2]`.
pub fn integrate_noise(traj: &RtpTrajectory, t1: f64, t2: f64) -> Result<f64> {
    if !(0.0 <= t1 && t1 <= t2 && t2 <= traj.horizon) {
        return Err(Error::OutOfRange { t1, t2, horizon: traj.horizon });
    }
    let start = traj.jump_times.partition_point(|&j| j <= t1);
    let mut z = if start % 2 == 0 { traj.z0 } else { -traj.z0 };
    let mut left = t1;
    let mut total = 0.0;
    for &jump in &traj.jump_times[start..] {
        if jump >= t2 {
            break;
        }
        total += f64::from(z) * (jump - left);
        left = jump;
        z = -z;
    }
    total += f64::from(z) * (t2 - left);
    Ok(total)
}
