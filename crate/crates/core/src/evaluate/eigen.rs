//! Stable eigenstates of repeated null results and the asymptotic rate of
//! the Theta family.

use num_complex::Complex64 as C64;

use crate::bayes_maps::{ComplexMap2, HTriple, Outcome, SensitivityPair};
use crate::rtp::{steady_state, RtpParams};
use crate::state::{complex_coherence, CoherenceVector};
use crate::{Error, Result};

/// Eigenpair of `f0` with the larger eigenvalue modulus; the eigenvector is
/// scaled so that `I^T E = 1`. Null results drive every state towards it.
pub fn stable_eigenstate(f0: &ComplexMap2) -> Result<(CoherenceVector, C64)> {
    let half_trace = f0.trace() * 0.5;
    let disc = (half_trace * half_trace - f0.det()).sqrt();
    let (l1, l2) = (half_trace + disc, half_trace - disc);
    let (big, small) = if l1.norm() >= l2.norm() { (l1, l2) } else { (l2, l1) };
    if big.norm() - small.norm() <= 1e-12 * big.norm() {
        return Err(Error::DegenerateEigenvalues);
    }
    let m = &f0.0;
    let from_row0 = [m[0][1], big - m[0][0]];
    let from_row1 = [big - m[1][1], m[1][0]];
    let norm = |v: &[C64; 2]| v[0].norm() + v[1].norm();
    let v = if norm(&from_row0) >= norm(&from_row1) { from_row0 } else { from_row1 };
    let sum = v[0] + v[1];
    if !(sum.norm() > 1e-300) {
        return Err(Error::InvalidParameter("stable eigenvector has zero coherence".into()));
    }
    Ok((CoherenceVector::new(v[0] / sum, v[1] / sum), big))
}

/// Leading-order-in-`1/K` statistics `(alpha, zeta)` of the stable
/// eigenstate of the Theta-family policy at sign `s`.
pub fn eigenstate_stats_asymptotic(params: &RtpParams, k_big: f64, theta: f64, s: f64) -> Result<(f64, f64)> {
    let sin = theta.sin();
    if !(theta > 0.0 && theta < std::f64::consts::PI) || sin.abs() < 1e-12 {
        return Err(Error::SingularAngle(theta));
    }
    let (up, down) = (params.gamma_up(), params.gamma_down());
    let asym = s * (down - up) / k_big;
    let denom = 12.0 * (2.0 * theta + (2.0 * theta).sin()).powi(2);
    let alpha = (n_theta(theta) + asym * m_theta(theta)) / denom;
    let gamma_s = if s > 0.0 { down } else { up };
    let csc = 1.0 / sin;
    let zeta = s * (1.0 - gamma_s / k_big * (csc * (theta.cos() + theta * csc)));
    Ok((alpha, zeta))
}

fn n_theta(t: f64) -> f64 {
    let (s2, c2) = (2.0 * t).sin_cos();
    let cot = 1.0 / t.tan();
    let csc2 = 1.0 / t.sin().powi(2);
    24.0 * (t - 2.0 * t.powi(3) + 3.0 * t * c2 + 0.25 * (4.0 * t).sin() - 0.5 * s2
        + t * t * (8.0 * cot + 4.0 * t * csc2 - s2))
}

fn m_theta(t: f64) -> f64 {
    let t2 = t * t;
    let cot = 1.0 / t.tan();
    let csc2 = 1.0 / t.sin().powi(2);
    -15.0 + 8.0 * t2 * (t2 - 15.0) - 12.0 * (2.0 * t2 - 1.0) * (2.0 * t).cos() + 3.0 * (4.0 * t).cos()
        + 192.0 * t.powi(3) * cot.powi(3)
        - 96.0 * t2 * (t2 - 1.0) * csc2
        + 96.0 * t2 * t2 * csc2 * csc2
        + 16.0 * t.powi(3) * (2.0 * t).sin()
}

/// Expected decoherence rate of the Theta family, built from the relative
/// coherence lost per step in each stable eigenstate.
pub fn gamma_bar_theta(params: &RtpParams, sens: &SensitivityPair, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::SingularAngle(theta));
    }
    let tau = theta / sens.k_big;
    let triple = HTriple::new(params, sens, tau);
    let weights = steady_state(params);
    let mut total = 0.0;
    for (s, w) in [(1.0, weights[0]), (-1.0, weights[1])] {
        let (e, _) = stable_eigenstate(&triple.f(s * theta, Outcome::Null))?;
        let before = complex_coherence(&e).norm();
        let after: f64 = Outcome::BOTH
            .iter()
            .map(|&y| complex_coherence(&CoherenceVector::from_array(triple.f(s * theta, y).apply(e.as_array()))).norm())
            .sum();
        total += w * (before - after) / (tau * before);
    }
    Ok(total)
}

/// Asymptotic scaled decoherence rate of the Theta family.
pub fn h_theta(theta: f64) -> Result<f64> {
    let sin = theta.sin();
    if !(theta > 0.0 && theta < std::f64::consts::PI) || sin.abs() < 1e-12 {
        return Err(Error::SingularAngle(theta));
    }
    let csc2 = 1.0 / (sin * sin);
    let cot = theta.cos() / sin;
    let t2 = theta * theta;
    Ok(3.0 * t2 * csc2 * csc2 - (2.0 * theta * (theta - cot) + 1.0) * csc2 + t2 / 3.0 - 1.0)
}

/// Golden-section minimum of [`h_theta`] on `[1, 2]`, returned as
/// `(theta_star, h_star)`.
pub fn minimize_h_theta() -> (f64, f64) {
    let f = |t: f64| h_theta(t).expect("bracket avoids the poles");
    let ratio = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1.0, 2.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes_maps::h_matrix;
    use crate::state::{stats, update_coherence};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn setup(k: f64) -> (RtpParams, SensitivityPair) {
        (RtpParams::symmetric(1.0).unwrap(), SensitivityPair::new(0.2, k).unwrap())
    }

    #[test]
    fn perron_pair_of_the_propagator() {
        let p = RtpParams::new(0.6, 1.4).unwrap();
        let (e, l) = stable_eigenstate(&h_matrix(&p, 0.3, 0.0)).unwrap();
        let ss = steady_state(&p);
        assert!((l - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((e.plus.re - ss[0]).abs() < 1e-14 && (e.minus.re - ss[1]).abs() < 1e-14);
    }

    #[test]
    fn eigen_residual() {
        let (p, s) = setup(20.0);
        let f = HTriple::new(&p, &s, 0.07).f(1.4, Outcome::Null);
        let (e, l) = stable_eigenstate(&f).unwrap();
        let fe = f.apply(e.as_array());
        assert!((fe[0] - l * e.plus).norm() < 1e-12 && (fe[1] - l * e.minus).norm() < 1e-12);
        assert!((complex_coherence(&e) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn power_iteration_converges_to_eigenstate() {
        let (p, s) = setup(20.0);
        let f = HTriple::new(&p, &s, 0.075).f(1.5, Outcome::Null);
        let (e, _) = stable_eigenstate(&f).unwrap();
        let mut v = CoherenceVector::new(C64::new(0.5, 0.0), C64::new(0.5, 0.0));
        for _ in 0..200 {
            v = update_coherence(&v, &f).unwrap();
            let c = complex_coherence(&v);
            v = v.scaled(1.0 / c);
        }
        assert!((v.plus - e.plus).norm() < 1e-12 && (v.minus - e.minus).norm() < 1e-12);
    }

    #[test]
    fn identity_is_degenerate() {
        assert_eq!(stable_eigenstate(&ComplexMap2::identity()), Err(Error::DegenerateEigenvalues));
    }

    #[test]
    fn h_theta_values() {
        assert!((h_theta(FRAC_PI_2).unwrap() - (PI * PI / 3.0 - 2.0)).abs() < 1e-12);
        assert!(h_theta(1e-3).unwrap() > 1e6);
        assert!(h_theta(0.0).is_err() && h_theta(PI).is_err());
    }

    #[test]
    fn h_theta_is_unimodal_on_the_bracket() {
        let values: Vec<f64> = (0..=100).map(|i| h_theta(1.0 + i as f64 / 100.0).unwrap()).collect();
        let min = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(values[..=min].windows(2).all(|w| w[1] < w[0]));
        assert!(values[min..].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn minimum_of_h_theta() {
        let (t, h) = minimize_h_theta();
        assert!((t - 1.50055).abs() < 1e-4, "{t}");
        assert!((h - 1.254).abs() < 1e-3, "{h}");
        let d = 1e-4;
        let curvature = (h_theta(t + d).unwrap() - 2.0 * h + h_theta(t - d).unwrap()) / (d * d);
        assert!(curvature > 0.0);
    }

    #[test]
    fn asymptotic_stats_symmetry() {
        let p = RtpParams::symmetric(1.0).unwrap();
        let (ap, zp) = eigenstate_stats_asymptotic(&p, 100.0, 1.2, 1.0).unwrap();
        let (am, zm) = eigenstate_stats_asymptotic(&p, 100.0, 1.2, -1.0).unwrap();
        assert_eq!(ap, am);
        assert_eq!(zp, -zm);
        let (_, z) = eigenstate_stats_asymptotic(&p, 1e12, 1.2, -1.0).unwrap();
        assert!((z + 1.0).abs() < 1e-10);
        assert!(eigenstate_stats_asymptotic(&p, 100.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn asymptotic_stats_match_numeric_eigenstate() {
        let (p, s) = setup(100.0);
        let theta = minimize_h_theta().0;
        for sign in [1.0, -1.0] {
            let f = HTriple::new(&p, &s, theta / 100.0).f(sign * theta, Outcome::Null);
            let (e, _) = stable_eigenstate(&f).unwrap();
            let st = stats(&e, &s).unwrap();
            let (alpha, zeta) = eigenstate_stats_asymptotic(&p, 100.0, theta, sign).unwrap();
            assert!((st.zeta - zeta).abs() < 1e-3);
            assert!((st.alpha / alpha - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn gamma_bar_tracks_h_theta() {
        let (p, s) = setup(100.0);
        let scale = 2.0 * 100.0 * 100.0 / (p.gamma_breve() * 0.04);
        for i in 0..=8 {
            let theta = 1.0 + 0.1 * i as f64;
            let g = gamma_bar_theta(&p, &s, theta).unwrap() * scale;
            let h = h_theta(theta).unwrap();
            assert!((g / h - 1.0).abs() < 0.02, "theta {theta}: {g} vs {h}");
        }
        for i in 0..=28 {
            let theta = 0.2 + 0.1 * i as f64;
            assert!(gamma_bar_theta(&p, &s, theta).unwrap() > 0.0);
        }
    }

    #[test]
    fn gamma_bar_minimum_near_theta_star() {
        let (p, s) = setup(100.0);
        let best = (0..=400)
            .map(|i| 1.3 + 0.001 * i as f64)
            .map(|t| (t, gamma_bar_theta(&p, &s, t).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((best.0 - 1.50055).abs() < 0.01, "{best:?}");
    }
}
