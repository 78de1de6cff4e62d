use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use rtn_spectator::bayes_maps::{
    f_check, f_map, h_matrix, wrap_angle, HTriple, MeasurementSetting, Outcome, SensitivityPair,
};
use rtn_spectator::evaluate::{
    coherence_nc, exact_expected_coherence, exact_expected_coherence_with, EnumerationOptions,
    SignedFixed,
};
use rtn_spectator::rtp::{propagate, RtpParams};
use rtn_spectator::state::{complex_coherence, stats, zeta, CoherenceVector};
use rtn_spectator::strategies::{
    berry_wiseman_candidates, greedy_full_next_setting, next_setting, Greedy4Params, PolicyState,
    StrategySpec,
};
use rtn_spectator::C64;

fn rates() -> impl Strategy<Value = RtpParams> {
    (0.2f64..3.0, 0.2f64..3.0).prop_map(|(u, d)| RtpParams::new(u, d).unwrap())
}

fn probability() -> impl Strategy<Value = [f64; 2]> {
    (0.0f64..=1.0).prop_map(|p| [p, 1.0 - p])
}

/// A state close to what a record produces: positive weights with a small
/// relative phase.
fn near_physical() -> impl Strategy<Value = CoherenceVector> {
    (0.01f64..1.0, 0.01f64..1.0, -0.3f64..0.3, -PI..PI).prop_map(|(p, m, dphi, common)| {
        CoherenceVector::new(C64::from_polar(p, common + dphi), C64::from_polar(m, common))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn propagate_is_stochastic(params in rates(), p in probability(), tau in 0.0f64..20.0) {
        let q = propagate(&params, p, tau);
        prop_assert!(q[0] >= 0.0 && q[1] >= 0.0);
        prop_assert!((q[0] + q[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn propagate_semigroup(params in rates(), p in probability(), t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        let a = propagate(&params, propagate(&params, p, t1), t2);
        let b = propagate(&params, p, t1 + t2);
        prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn h_chapman_kolmogorov(params in rates(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0, k in 0.0f64..30.0) {
        let lhs = h_matrix(&params, t1 + t2, k);
        let rhs = h_matrix(&params, t2, k) * h_matrix(&params, t1, k);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12, "{}", lhs.max_abs_diff(&rhs));
    }

    #[test]
    fn coherence_is_bounded(params in rates(), p in probability(), t in 0.0f64..10.0, k in 0.0f64..50.0) {
        let v = h_matrix(&params, t, k).apply([C64::new(p[0], 0.0), C64::new(p[1], 0.0)]);
        prop_assert!((v[0] + v[1]).norm() <= 1.0 + 1e-14);
    }

    #[test]
    fn outcomes_sum_to_h(
        params in rates(),
        kappa in 0.0f64..1.0,
        k_big in 1.0f64..100.0,
        theta in -PI..PI,
        tau in 1e-4f64..2.0,
    ) {
        let sens = SensitivityPair::new(kappa, k_big).unwrap();
        let mu = MeasurementSetting::new(theta, tau).unwrap();
        let sum = f_map(&params, &sens, &mu, Outcome::Null) + f_map(&params, &sens, &mu, Outcome::NonNull);
        let h = h_matrix(&params, tau, kappa);
        prop_assert!(sum.max_abs_diff(&h) < 1e-13);
    }

    #[test]
    fn f_is_dominated_by_check(
        params in rates(),
        kappa in 0.0f64..1.0,
        k_big in 1.0f64..100.0,
        theta in -PI..PI,
        tau in 1e-3f64..2.0,
    ) {
        let sens = SensitivityPair::new(kappa, k_big).unwrap();
        let mu = MeasurementSetting::new(theta, tau).unwrap();
        for y in Outcome::BOTH {
            let f = f_map(&params, &sens, &mu, y);
            let check = f_check(&params, k_big, &mu, y);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!(f.0[i][j].norm() <= check[i][j] + 1e-13);
                }
            }
        }
    }

    #[test]
    fn h_continuous_where_lambda_vanishes(gamma in 0.2f64..3.0, t in 0.01f64..5.0) {
        let params = RtpParams::symmetric(gamma).unwrap();
        let bar = params.gamma_bar();
        let at = h_matrix(&params, t, bar);
        for offset in [1e-12, -1e-12, 1e-10, -1e-10] {
            prop_assert!(at.max_abs_diff(&h_matrix(&params, t, bar + offset)) < 1e-8);
        }
    }

    #[test]
    fn stats_are_projective(a in near_physical(), modulus in 0.01f64..100.0, phase in -PI..PI) {
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let c = C64::from_polar(modulus, phase);
        let s0 = stats(&a, &sens).unwrap();
        let s1 = stats(&a.scaled(c), &sens).unwrap();
        prop_assert!((s0.alpha - s1.alpha).abs() < 1e-9 * (1.0 + s0.alpha.abs()));
        prop_assert!((s0.zeta - s1.zeta).abs() < 1e-12);
        prop_assert!(wrap_angle(s1.varphi - s0.varphi - phase).abs() < 1e-9);
        prop_assert!((s1.r - modulus * s0.r).abs() < 1e-12 * s1.r);
    }

    #[test]
    fn zeta_of_probabilities_is_the_mean(p in probability()) {
        let z = zeta(&CoherenceVector::from_probabilities(p));
        prop_assert!((z - (p[0] - p[1])).abs() < 1e-15);
    }

    #[test]
    fn reflection_mirrors_zeta_and_phase(a in near_physical()) {
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let s0 = stats(&a, &sens).unwrap();
        let s1 = stats(&a.reflected(), &sens).unwrap();
        prop_assert!((s0.zeta + s1.zeta).abs() < 1e-12);
        prop_assert!(wrap_angle(s0.varphi + s1.varphi).abs() < 1e-12);
        prop_assert!((s0.r - s1.r).abs() < 1e-15);
        // the relative phase of the swapped, conjugated pair is unchanged
        prop_assert!((s0.alpha - s1.alpha).abs() < 1e-9 * (1.0 + s0.alpha.abs()));
    }

    #[test]
    fn reduced_policies_are_equivariant(
        a in near_physical(),
        step in 1usize..10,
        big_theta in 0.3f64..2.8,
        threshold in -5.0f64..5.0,
    ) {
        let params = RtpParams::symmetric(1.0).unwrap();
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let g = Greedy4Params { theta_gt: 1.55, theta_lt: 1.62, delta_gt: 1.5, delta_lt: 1.7, alpha_threshold: threshold };
        prop_assume!(a.plus.norm() != a.minus.norm());
        for spec in [
            StrategySpec::ThetaFamily { big_theta },
            StrategySpec::Greedy4(g),
            StrategySpec::NonAdaptive { theta: big_theta, tau: 0.05 },
        ] {
            let x = next_setting(&spec, &PolicyState { step, vector: a }, &params, &sens).unwrap();
            let y = next_setting(&spec, &PolicyState { step, vector: a.reflected() }, &params, &sens).unwrap();
            prop_assert_eq!(x.tau, y.tau);
            if spec.is_adaptive() {
                prop_assert_eq!(x.theta, -y.theta);
            } else {
                prop_assert_eq!(x.theta, y.theta);
            }
        }
    }

    #[test]
    fn half_pi_family_uses_one_basis(a in near_physical(), step in 0usize..10) {
        let params = RtpParams::symmetric(1.0).unwrap();
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let spec = StrategySpec::ThetaFamily { big_theta: FRAC_PI_2 };
        let x = next_setting(&spec, &PolicyState { step, vector: a }, &params, &sens).unwrap();
        // theta and theta + pi describe the same measurement basis
        prop_assert!((x.theta.abs() - FRAC_PI_2).abs() < 1e-15);
        let mu = MeasurementSetting::new(FRAC_PI_2, x.tau).unwrap();
        let nu = MeasurementSetting::new(-FRAC_PI_2, x.tau).unwrap();
        let f = f_map(&params, &sens, &mu, Outcome::Null);
        let g = f_map(&params, &sens, &nu, Outcome::NonNull);
        prop_assert!(f.max_abs_diff(&g) < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn greedy_angle_is_a_candidate(a in near_physical()) {
        let params = RtpParams::symmetric(1.0).unwrap();
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let mu = greedy_full_next_setting(&a, &params, &sens, None).unwrap();
        let candidates = berry_wiseman_candidates(&a, mu.tau, &params, &sens).unwrap();
        let hit = candidates.iter().any(|&c| {
            let d = wrap_angle(c - mu.theta).abs();
            d < 1e-9 || (d - PI).abs() < 1e-9
        });
        prop_assert!(hit, "{} not in {:?}", mu.theta, candidates);
    }

    #[test]
    fn greedy_is_equivariant(a in near_physical()) {
        let params = RtpParams::symmetric(1.0).unwrap();
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let x = greedy_full_next_setting(&a, &params, &sens, None).unwrap();
        let y = greedy_full_next_setting(&a.reflected(), &params, &sens, None).unwrap();
        prop_assert!((x.tau - y.tau).abs() < 1e-12);
        prop_assert!(wrap_angle(x.theta + y.theta).abs() < 1e-9);
    }

    #[test]
    fn enumeration_conserves_probability(
        big_theta in 0.5f64..2.5,
        k_tau in 0.5f64..3.0,
        n in 1usize..10,
        up in 0.5f64..2.0,
        down in 0.5f64..2.0,
    ) {
        let params = RtpParams::new(up, down).unwrap();
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        for spec in [
            StrategySpec::NonAdaptive { theta: big_theta, tau: k_tau / 20.0 },
            StrategySpec::ThetaFamily { big_theta },
        ] {
            let e = exact_expected_coherence(&spec, n, &params, &sens).unwrap();
            prop_assert!((e.total_probability - 1.0).abs() < 1e-10);
        }
        let policy = SignedFixed { big_theta, tau: k_tau / 20.0 };
        let e = exact_expected_coherence_with(&policy, n, &params, &sens, &EnumerationOptions::default()).unwrap();
        prop_assert!((e.total_probability - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ignoring_outcomes_gives_no_control(
        params in rates(),
        theta in -PI..PI,
        tau in 0.01f64..0.5,
        n in 1usize..30,
    ) {
        let sens = SensitivityPair::new(0.2, 20.0).unwrap();
        let mu = MeasurementSetting::new(theta, tau).unwrap();
        let triple = HTriple::new(&params, &sens, mu.tau);
        let summed = triple.f(theta, Outcome::Null) + triple.f(theta, Outcome::NonNull);
        let ss = rtn_spectator::rtp::steady_state(&params);
        let mut a = CoherenceVector::from_probabilities(ss);
        for _ in 0..n {
            a = CoherenceVector::from_array(summed.apply(a.as_array()));
        }
        let expected = coherence_nc(&params, sens.kappa, n as f64 * tau);
        prop_assert!((complex_coherence(&a).norm() - expected).abs() < 1e-12);
    }
}
