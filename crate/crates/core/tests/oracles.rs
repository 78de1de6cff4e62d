//! Independent checks of the closed forms against brute-force numerics.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtn_spectator::bayes_maps::{
    f_check, f_map, h_matrix, likelihood, MeasurementSetting, Outcome, SensitivityPair,
};
use rtn_spectator::evaluate::stable_eigenstate;
use rtn_spectator::rtp::{integrate_noise, jump_matrix, propagate, sample_trajectory, RtpParams};
use rtn_spectator::state::CoherenceVector;
use rtn_spectator::C64;

fn index(z: i8) -> usize {
    usize::from(z < 0)
}

/// `exp((J + i k Z) t)` with `Z = diag(+1, -1)`.
fn expm(params: &RtpParams, t: f64, k: f64) -> Matrix2<C64> {
    let j = jump_matrix(params);
    let gen = Matrix2::new(
        C64::new(j[0][0], k),
        C64::new(j[0][1], 0.0),
        C64::new(j[1][0], 0.0),
        C64::new(j[1][1], -k),
    );
    (gen * C64::new(t, 0.0)).exp()
}

#[test]
fn h_matches_matrix_exponential() {
    for (up, down) in [(1.0, 1.0), (0.3, 2.2), (1.7, 0.4)] {
        let params = RtpParams::new(up, down).unwrap();
        for t in [0.0, 1e-7, 0.01, 0.5, 3.0, 12.0] {
            for k in [0.0, 0.2, 1.0, 7.5] {
                let h = h_matrix(&params, t, k);
                let e = expm(&params, t, k);
                for r in 0..2 {
                    for c in 0..2 {
                        let d = (h.0[r][c] - e[(r, c)]).norm();
                        assert!(d < 1e-10, "up={up} down={down} t={t} k={k}: {d}");
                    }
                }
            }
        }
    }
}

#[test]
fn h_matches_sampled_noise() {
    let params = RtpParams::new(0.8, 1.3).unwrap();
    let (t, k) = (1.5, 0.7);
    let n = 200_000;
    let h = h_matrix(&params, t, k);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for z0 in [1i8, -1] {
        let mut sums = [C64::new(0.0, 0.0); 2];
        let mut sq = [0.0; 2];
        for _ in 0..n {
            let traj = sample_trajectory(&params, z0, t, &mut rng).unwrap();
            let x = integrate_noise(&traj, 0.0, t).unwrap();
            let w = C64::from_polar(1.0, k * x);
            sums[index(traj.final_value())] += w;
            sq[index(traj.final_value())] += 1.0;
        }
        for out in 0..2 {
            let mean = sums[out] / n as f64;
            // each component is bounded by the indicator, so its variance is
            // at most the indicator's mean
            let sigma = (sq[out] / n as f64 / n as f64).sqrt();
            let d = (mean - h.0[out][index(z0)]).norm();
            assert!(d < 4.0 * sigma, "z0={z0} out={out}: {d} vs {sigma}");
        }
    }
}

#[test]
fn transition_frequencies_pass_chi_squared() {
    let params = RtpParams::new(0.6, 1.4).unwrap();
    let tau = 0.7;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for z0 in [1i8, -1] {
        let start = if z0 > 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        let expected = propagate(&params, start, tau);
        let mut counts = [0usize; 2];
        for _ in 0..n {
            counts[index(sample_trajectory(&params, z0, tau, &mut rng).unwrap().final_value())] += 1;
        }
        let chi2: f64 = (0..2)
            .map(|i| {
                let e = expected[i] * n as f64;
                (counts[i] as f64 - e).powi(2) / e
            })
            .sum();
        // one degree of freedom, p = 0.001
        assert!(chi2 < 10.83, "z0={z0}: chi2 = {chi2}");
    }
}

#[test]
fn check_map_matches_sampled_records() {
    let params = RtpParams::symmetric(1.0).unwrap();
    let k_big = 20.0;
    let mu = MeasurementSetting::new(1.2, 0.08).unwrap();
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let maps = [
        f_check(&params, k_big, &mu, Outcome::Null),
        f_check(&params, k_big, &mu, Outcome::NonNull),
    ];
    for z0 in [1i8, -1] {
        let mut counts = [[0usize; 2]; 2];
        for _ in 0..n {
            let traj = sample_trajectory(&params, z0, mu.tau, &mut rng).unwrap();
            let x = integrate_noise(&traj, 0.0, mu.tau).unwrap();
            let p_null = likelihood(Outcome::Null, mu.theta, x, k_big);
            let y = usize::from(rng.random::<f64>() >= p_null);
            counts[y][index(traj.final_value())] += 1;
        }
        for y in 0..2 {
            for out in 0..2 {
                let p = maps[y][out][index(z0)];
                let freq = counts[y][out] as f64 / n as f64;
                let sigma = (p * (1.0 - p) / n as f64).sqrt().max(1e-6);
                assert!((freq - p).abs() < 4.0 * sigma, "z0={z0} y={y} out={out}: {freq} vs {p}");
            }
        }
    }
}

/// `F` is an average of `H` over the phase left on the spectator, so a fine
/// quadrature over sampled noise integrals reproduces it.
#[test]
fn f_map_matches_binned_noise() {
    let params = RtpParams::symmetric(1.0).unwrap();
    let sens = SensitivityPair::new(0.2, 20.0).unwrap();
    let mu = MeasurementSetting::new(-1.4, 0.07).unwrap();
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for z0 in [1i8, -1] {
        let mut sums = [[C64::new(0.0, 0.0); 2]; 2];
        for _ in 0..n {
            let traj = sample_trajectory(&params, z0, mu.tau, &mut rng).unwrap();
            let x = integrate_noise(&traj, 0.0, mu.tau).unwrap();
            let w = C64::from_polar(1.0, sens.kappa * x);
            for y in Outcome::BOTH {
                sums[y.bit() as usize][index(traj.final_value())] += w * likelihood(y, mu.theta, x, sens.k_big);
            }
        }
        for y in Outcome::BOTH {
            let f = f_map(&params, &sens, &mu, y);
            for out in 0..2 {
                let mean = sums[y.bit() as usize][out] / n as f64;
                let d = (mean - f.0[out][index(z0)]).norm();
                assert!(d < 5e-3, "z0={z0} y={y:?} out={out}: {d}");
            }
        }
    }
}

#[test]
fn stable_eigenstate_matches_power_iteration() {
    let params = RtpParams::new(0.9, 1.1).unwrap();
    let sens = SensitivityPair::new(0.2, 20.0).unwrap();
    for theta in [1.0, 1.50055, -1.3] {
        let mu = MeasurementSetting::new(theta, theta.abs() / sens.k_big).unwrap();
        let f = f_map(&params, &sens, &mu, Outcome::Null);
        let (e, lambda) = stable_eigenstate(&f).unwrap();
        let mut v = [C64::new(0.5, 0.0), C64::new(0.5, 0.0)];
        let mut ratio = C64::new(0.0, 0.0);
        for _ in 0..2000 {
            let w = f.apply(v);
            let sum = w[0] + w[1];
            ratio = sum / (v[0] + v[1]);
            v = [w[0] / sum, w[1] / sum];
        }
        let iterated = CoherenceVector::new(v[0], v[1]);
        assert!((iterated.plus - e.plus).norm() < 1e-10, "theta={theta}");
        assert!((iterated.minus - e.minus).norm() < 1e-10, "theta={theta}");
        assert!((ratio - lambda).norm() < 1e-10, "theta={theta}");
    }
}
