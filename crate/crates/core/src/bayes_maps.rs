//! Closed-form maps that carry the coherence vector through one interval.
//!
//! `h_matrix(t, k)` is the Fourier transform, at frequency `k`, of the joint
//! density of accumulated noise and the final telegraph value. The measurement
//! map `F` combines three such transforms with the spectator-qubit likelihood.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::rtp::{Matrix2, RtpParams};
use crate::{Error, Result};

/// Below this value of `|lambda| t` the hyperbolic terms use their series.
const SERIES_CUTOFF: f64 = 1e-6;

/// Complex 2x2 map indexed `[z_out][z_in]`, with `+1` first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMap2(pub [[C64; 2]; 2]);

impl ComplexMap2 {
    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self([[o, z], [z, o]])
    }

    pub fn zero() -> Self {
        Self([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn from_real(m: &Matrix2) -> Self {
        Self([
            [C64::new(m[0][0], 0.0), C64::new(m[0][1], 0.0)],
            [C64::new(m[1][0], 0.0), C64::new(m[1][1], 0.0)],
        ])
    }

    pub fn entry(&self, out: usize, input: usize) -> C64 {
        self.0[out][input]
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Real parts, used for the probability (check) maps.
    pub fn re(&self) -> Matrix2 {
        let m = &self.0;
        [[m[0][0].re, m[0][1].re], [m[1][0].re, m[1][1].re]]
    }

    pub fn scale(&self, c: C64) -> Self {
        let m = &self.0;
        Self([[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]])
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

impl Add for ComplexMap2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for ComplexMap2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

/// Matrix product: `(a * b)` applies `b` first.
impl Mul for ComplexMap2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

/// Spectator measurement angle and the waiting time before it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub theta: f64,
    pub tau: f64,
}

impl MeasurementSetting {
    /// Wraps `theta` into `(-pi, pi]`.
    pub fn new(theta: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        Ok(Self { theta: wrap_angle(theta), tau })
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta - 2.0 * PI * ((theta + PI) / (2.0 * PI)).floor();
    // floor puts -pi at -pi; the interval is open there
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Noise sensitivities of the data qubit (`kappa`) and spectator qubit (`k_big`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPair {
    pub kappa: f64,
    pub k_big: f64,
}

impl SensitivityPair {
    pub fn new(kappa: f64, k_big: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter("kappa must be >= 0".into()));
        }
        if !(k_big.is_finite() && k_big > 0.0) {
            return Err(Error::InvalidParameter("k_big must be > 0".into()));
        }
        Ok(Self { kappa, k_big })
    }

    /// The same spectator with a data qubit that does not dephase.
    pub fn probability_limit(&self) -> Self {
        Self { kappa: 0.0, k_big: self.k_big }
    }
}

/// Outcome of a spectator measurement. `Null` confirms the expected state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Null,
    NonNull,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Null, Outcome::NonNull];

    pub fn bit(self) -> u8 {
        match self {
            Outcome::Null => 0,
            Outcome::NonNull => 1,
        }
    }

    pub fn from_bit(y: u8) -> Self {
        if y == 0 {
            Outcome::Null
        } else {
            Outcome::NonNull
        }
    }

    /// `(-1)^y`.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Null => 1.0,
            Outcome::NonNull => -1.0,
        }
    }
}

/// `lambda` and `eta` of the propagator at spectral argument `k`.
pub fn lambda_eta(params: &RtpParams, k: f64) -> (C64, C64) {
    let (up, down) = (params.gamma_up(), params.gamma_down());
    let sum = up + down;
    let diff = down - up;
    let radicand = C64::new(sum * sum - 4.0 * k * k, -4.0 * k * diff);
    (radicand.sqrt(), C64::new(diff, -2.0 * k))
}

/// Fourier-weighted propagator over a time `t`.
pub fn h_matrix(params: &RtpParams, t: f64, k: f64) -> ComplexMap2 {
    let (lambda, eta) = lambda_eta(params, k);
    h_from_lambda(params, t, lambda, eta)
}

fn h_from_lambda(params: &RtpParams, t: f64, lambda: C64, eta: C64) -> ComplexMap2 {
    let bar = params.gamma_bar();
    let half = lambda * (0.5 * t);
    let (cosh, sinh_over) = if lambda.norm() * t < SERIES_CUTOFF {
        let sq = half * half;
        (1.0 + sq * 0.5, (1.0 + sq / 6.0) * (0.5 * t))
    } else {
        (half.cosh(), half.sinh() / lambda)
    };
    let damp = (-bar * t).exp();
    let (c, s) = if damp > 0.0 && cosh.norm().is_finite() {
        (cosh * damp, sinh_over * damp)
    } else {
        // split the exponentials so that large times neither overflow nor
        // underflow before the damping is applied
        let ep = (half - bar * t).exp();
        let em = (-half - bar * t).exp();
        ((ep + em) * 0.5, (ep - em) / (lambda * 2.0))
    };
    ComplexMap2([
        [c - eta * s, s * (2.0 * params.gamma_up())],
        [s * (2.0 * params.gamma_down()), c + eta * s],
    ])
}

/// Born-rule probability of outcome `y` when measuring at angle `theta` after
/// the spectator accumulated the phase `k_big * x`.
pub fn likelihood(y: Outcome, theta: f64, x: f64, k_big: f64) -> f64 {
    let c = (0.5 * (theta - k_big * x)).cos();
    f64::from(y.bit()) + y.sign() * c * c
}

/// The three propagators needed for a measurement map at waiting time `tau`.
#[derive(Clone, Copy, Debug)]
pub struct HTriple {
    pub tau: f64,
    /// `H(tau, kappa)`.
    pub center: ComplexMap2,
    /// `H(tau, kappa + K)`.
    pub upper: ComplexMap2,
    /// `H(tau, kappa - K)`.
    pub lower: ComplexMap2,
}

impl HTriple {
    pub fn new(params: &RtpParams, sens: &SensitivityPair, tau: f64) -> Self {
        Self {
            tau,
            center: h_matrix(params, tau, sens.kappa),
            upper: h_matrix(params, tau, sens.kappa + sens.k_big),
            lower: h_matrix(params, tau, sens.kappa - sens.k_big),
        }
    }

    /// Measurement map for angle `theta` and outcome `y`.
    pub fn f(&self, theta: f64, y: Outcome) -> ComplexMap2 {
        let sign = y.sign();
        let rot = C64::from_polar(1.0, -theta);
        let quarter = C64::new(0.25, 0.0);
        (self.center.scale(C64::new(2.0, 0.0))
            + self.upper.scale(rot * sign)
            + self.lower.scale(rot.conj() * sign))
        .scale(quarter)
    }
}

/// Propagation over `mu.tau` followed by a measurement with outcome `y`.
pub fn f_map(
    params: &RtpParams,
    sens: &SensitivityPair,
    mu: &MeasurementSetting,
    y: Outcome,
) -> ComplexMap2 {
    HTriple::new(params, sens, mu.tau).f(mu.theta, y)
}

/// Probability map: the joint probability of `y` and the final noise value,
/// given the initial noise value.
pub fn f_check(params: &RtpParams, k_big: f64, mu: &MeasurementSetting, y: Outcome) -> Matrix2 {
    let sens = SensitivityPair { kappa: 0.0, k_big };
    f_map(params, &sens, mu, y).re()
}
