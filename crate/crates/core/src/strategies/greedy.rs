//! The full Greedy policy.
//!
//! At each step Greedy compares two scenarios over a short horizon `tau + dt`:
//! (i) measure once at the end, (ii) measure at `tau` and again after `dt`.
//! The next measurement happens at the first `tau` where the second scenario
//! is better. For a fixed waiting time the best angle is one of three closed
//! form candidates.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::bayes_maps::{wrap_angle, HTriple, MeasurementSetting, Outcome, SensitivityPair};
use crate::rtp::RtpParams;
use crate::state::{complex_coherence, CoherenceVector};
use crate::{Error, Result};

/// Default `K dt`, both for the scenario offset and the scan step.
pub const DEFAULT_DT_SCALED: f64 = 1e-3;

/// Points in the fallback angle grid used when the candidates are degenerate.
const FALLBACK_GRID: usize = 721;

/// Differences smaller than this (relative to the vector norm) are rounding.
const NOISE_FLOOR: f64 = 1e-13;

/// Bisection stops once the bracket is below this times `1 / K`.
const ROOT_TOLERANCE: f64 = 1e-12;

/// `a = 2 I^T H(tau, kappa) A`, `b = I^T H(tau, kappa + K) A`,
/// `c = I^T H(tau, kappa - K) A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BwTerms {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

impl BwTerms {
    pub fn new(triple: &HTriple, v: &CoherenceVector) -> Self {
        let sum = |m: &crate::bayes_maps::ComplexMap2| {
            complex_coherence(&CoherenceVector::from_array(m.apply(v.as_array())))
        };
        Self { a: sum(&triple.center) * 2.0, b: sum(&triple.upper), c: sum(&triple.lower) }
    }

    /// The three stationary angles of the one-measurement reward.
    pub fn candidates(&self) -> Result<[f64; 3]> {
        let (a, b, c) = (self.a, self.b, self.c);
        let c1 = (a.conj() * c).powi(2) - (a * b.conj()).powi(2)
            + (b.norm_sqr() - c.norm_sqr()) * 4.0 * b.conj() * c;
        let c2 = C64::new(0.0, -2.0 * (a * a * b.conj() * c.conj()).im);
        let scale = (a.norm() + b.norm() + c.norm()).powi(4);
        if !(c1.norm() > 1e-14 * scale) {
            return Err(Error::DegenerateCandidates);
        }
        let theta0 = (b * a.conj() - c.conj() * a).arg();
        let root = (c2 * c2 + c1.norm_sqr()).sqrt();
        let plus = ((c2 + root) / c1).sqrt().arg();
        let minus = ((c2 - root) / c1).sqrt().arg();
        let out = [theta0, plus, minus];
        if out.iter().all(|t| t.is_finite()) {
            Ok(out)
        } else {
            Err(Error::DegenerateCandidates)
        }
    }

    /// `sum_y |I^T F(theta, y) A|`.
    pub fn reward(&self, theta: f64) -> f64 {
        let u = self.b * C64::from_polar(1.0, -theta) + self.c * C64::from_polar(1.0, theta);
        0.25 * ((self.a + u).norm() + (self.a - u).norm())
    }
}

fn fallback_angles() -> impl Iterator<Item = f64> {
    (1..=FALLBACK_GRID).map(|j| -PI + 2.0 * PI * j as f64 / FALLBACK_GRID as f64)
}

/// Candidate angles for measuring the state `a` after waiting `tau`.
pub fn berry_wiseman_candidates(
    a: &CoherenceVector,
    tau: f64,
    params: &RtpParams,
    sens: &SensitivityPair,
) -> Result<[f64; 3]> {
    BwTerms::new(&HTriple::new(params, sens, tau), a).candidates()
}

/// Reward of a single measurement at angle `theta` after waiting `tau`.
pub fn one_measurement_reward(
    a: &CoherenceVector,
    theta: f64,
    tau: f64,
    params: &RtpParams,
    sens: &SensitivityPair,
) -> f64 {
    BwTerms::new(&HTriple::new(params, sens, tau), a).reward(theta)
}

/// Best single-measurement reward and its angle, falling back to a grid scan
/// when the candidates are degenerate.
pub fn best_one_measurement(terms: &BwTerms) -> (f64, f64) {
    let pick = |best: (f64, f64), theta: f64| {
        let r = terms.reward(theta);
        if r > best.0 {
            (r, theta)
        } else {
            best
        }
    };
    let start = (f64::NEG_INFINITY, 0.0);
    match terms.candidates() {
        Ok(c) => c.into_iter().fold(start, pick),
        Err(_) => fallback_angles().fold(start, pick),
    }
}

/// Maximized rewards of the two Greedy scenarios at waiting time `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioRewards {
    /// Single measurement at `tau + dt`.
    pub c_i: f64,
    /// Measurements at `tau` and `tau + dt`.
    pub c_ii: f64,
    /// Maximizing first angle of scenario (ii), in canonical form.
    pub theta_ii: f64,
}

struct Scanner<'a> {
    a: &'a CoherenceVector,
    params: &'a RtpParams,
    sens: &'a SensitivityPair,
    dt: f64,
    tail: HTriple,
}

impl<'a> Scanner<'a> {
    fn new(a: &'a CoherenceVector, params: &'a RtpParams, sens: &'a SensitivityPair, dt: f64) -> Self {
        Self { a, params, sens, dt, tail: HTriple::new(params, sens, dt) }
    }

    fn triple(&self, tau: f64) -> HTriple {
        HTriple::new(self.params, self.sens, tau)
    }

    fn rewards(&self, at_tau: &HTriple, at_tau_dt: &HTriple) -> ScenarioRewards {
        let (c_i, _) = best_one_measurement(&BwTerms::new(at_tau_dt, self.a));
        let k_dt = self.sens.k_big * self.dt;
        let two_step = |theta: f64| -> f64 {
            Outcome::BOTH
                .iter()
                .map(|&y| {
                    let after = CoherenceVector::from_array(at_tau.f(theta, y).apply(self.a.as_array()));
                    BwTerms::new(&self.tail, &after).reward(after.sign() * k_dt)
                })
                .sum()
        };
        let first = BwTerms::new(at_tau, self.a);
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut consider = |theta: f64| {
            let r = two_step(theta);
            if r > best.0 {
                best = (r, theta);
            }
        };
        match first.candidates() {
            Ok(c) => c.into_iter().for_each(&mut consider),
            Err(_) => fallback_angles().for_each(&mut consider),
        }
        let theta_ii = canonical_angle(best.1, self.a.sign(), self.sens.k_big * at_tau.tau);
        ScenarioRewards { c_i, c_ii: best.0, theta_ii }
    }

    fn at(&self, tau: f64) -> ScenarioRewards {
        self.rewards(&self.triple(tau), &self.triple(tau + self.dt))
    }
}

/// Rewards are `pi`-periodic in the angle, and shifting by `pi` swaps the
/// outcome labels. Picks the representative nearest `s K tau`, which makes
/// outcome 0 the likely (null) result.
fn canonical_angle(theta: f64, s: f64, k_tau: f64) -> f64 {
    let target = s * k_tau;
    [theta, theta + PI, theta - PI]
        .into_iter()
        .map(wrap_angle)
        .min_by(|x, y| {
            let dx = wrap_angle(x - target).abs();
            let dy = wrap_angle(y - target).abs();
            dx.total_cmp(&dy)
        })
        .expect("three representatives")
}

/// Scenario rewards for the state `a` at waiting time `tau` with offset `dt`.
pub fn greedy_scenario_rewards(
    a: &CoherenceVector,
    tau: f64,
    dt: f64,
    params: &RtpParams,
    sens: &SensitivityPair,
) -> Result<ScenarioRewards> {
    if !(tau > 0.0 && dt > 0.0) {
        return Err(Error::InvalidParameter("tau and dt must be > 0".into()));
    }
    Ok(Scanner::new(a, params, sens, dt).at(tau))
}

/// `D(tau) = C_i - C_ii` with the default offset `dt = 0.001 / K`.
pub fn scenario_difference(
    a: &CoherenceVector,
    tau: f64,
    params: &RtpParams,
    sens: &SensitivityPair,
) -> Result<f64> {
    let r = greedy_scenario_rewards(a, tau, DEFAULT_DT_SCALED / sens.k_big, params, sens)?;
    Ok(r.c_i - r.c_ii)
}

/// Next Greedy setting: the first `tau` where measuring twice beats
/// measuring once, located by a forward scan and refined by bisection.
pub fn greedy_full_next_setting(
    a: &CoherenceVector,
    params: &RtpParams,
    sens: &SensitivityPair,
    dt_scan: Option<f64>,
) -> Result<MeasurementSetting> {
    let dt = DEFAULT_DT_SCALED / sens.k_big;
    let step = dt_scan.unwrap_or(dt);
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("dt_scan must be > 0".into()));
    }
    let scanner = Scanner::new(a, params, sens, dt);
    let floor = NOISE_FLOOR * a.one_norm();
    let tau_max = 10.0 / params.gamma_bar();
    let reuse = (step - dt).abs() <= 1e-12 * dt;

    let mut i = 1usize;
    let mut ahead: Option<HTriple> = None;
    loop {
        let tau = i as f64 * step;
        if tau > tau_max {
            return Err(Error::NoCrossing { tau_max });
        }
        let here = match ahead.take() {
            Some(t) if reuse => t,
            _ => scanner.triple(tau),
        };
        let next = scanner.triple(tau + dt);
        let r = scanner.rewards(&here, &next);
        if r.c_i - r.c_ii <= -floor {
            let (mut lo, mut hi) = (tau - step, tau);
            let mut found = r;
            let tol = ROOT_TOLERANCE / sens.k_big;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let m = scanner.at(mid);
                if m.c_i - m.c_ii <= 0.0 {
                    hi = mid;
                    found = m;
                } else {
                    lo = mid;
                }
            }
            return MeasurementSetting::new(found.theta_ii, hi);
        }
        ahead = Some(next);
        i += 1;
    }
}
