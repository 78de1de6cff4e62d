//! Reducing Greedy trajectories to the four Greedy4 constants.

use serde::{Deserialize, Serialize};

use super::Greedy4Params;
use crate::{Error, Result};

/// One Greedy decision: the `alpha` of the state it was based on, and the
/// chosen angle and waiting time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub alpha: f64,
    pub theta: f64,
    pub tau: f64,
}

/// Optimal split of 1-D data into two clusters; returns the (lower, upper)
/// cluster means.
pub fn two_means(values: &[f64]) -> Result<(f64, f64)> {
    let mut sorted: Vec<f64> = values.to_vec();
    if sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::Clustering("non-finite value".into()));
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n < 2 || sorted[0] == sorted[n - 1] {
        return Err(Error::Clustering("fewer than two distinct alpha values".into()));
    }
    let mut prefix = vec![0.0; n + 1];
    let mut prefix_sq = vec![0.0; n + 1];
    for (i, v) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
        prefix_sq[i + 1] = prefix_sq[i] + v * v;
    }
    let sse = |lo: usize, hi: usize| {
        let m = (hi - lo) as f64;
        let s = prefix[hi] - prefix[lo];
        prefix_sq[hi] - prefix_sq[lo] - s * s / m
    };
    let mut best = (f64::INFINITY, 1);
    for split in 1..n {
        if sorted[split - 1] == sorted[split] {
            continue;
        }
        let cost = sse(0, split) + sse(split, n);
        if cost < best.0 {
            best = (cost, split);
        }
    }
    let k = best.1;
    let low = (prefix[k] - prefix[0]) / k as f64;
    let high = (prefix[n] - prefix[k]) / (n - k) as f64;
    Ok((low, high))
}

/// Greedy4 constants from Greedy trajectories. The first `n_transient`
/// decisions of every trajectory are dropped; waits are scaled by `k_big`.
pub fn extract_greedy4_params(
    trajectories: &[Vec<GreedyStep>],
    n_transient: usize,
    k_big: f64,
) -> Result<Greedy4Params> {
    if n_transient < 2 {
        return Err(Error::InvalidParameter("n_transient must be >= 2".into()));
    }
    let kept: Vec<GreedyStep> = trajectories
        .iter()
        .flat_map(|t| t.iter().skip(n_transient).copied())
        .collect();
    let alphas: Vec<f64> = kept.iter().map(|s| s.alpha).collect();
    let (low, high) = two_means(&alphas)?;
    let threshold = 0.5 * (low + high);

    let mut sums = [[0.0; 3]; 2];
    for step in &kept {
        let g = usize::from(step.alpha > threshold);
        sums[g][0] += step.theta.abs();
        sums[g][1] += k_big * step.tau;
        sums[g][2] += 1.0;
    }
    let [lt, gt] = sums;
    Ok(Greedy4Params {
        theta_gt: gt[0] / gt[2],
        theta_lt: lt[0] / lt[2],
        delta_gt: gt[1] / gt[2],
        delta_lt: lt[1] / lt[2],
        alpha_threshold: threshold,
    })
}

/// Average waiting time of Greedy4 when the `lt` branch follows each
/// detected jump and the `gt` branch holds otherwise.
pub fn tau_effective(params: &Greedy4Params, k_big: f64, gamma_breve: f64) -> Result<f64> {
    let denom = k_big - gamma_breve * (params.delta_lt - params.delta_gt);
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter(format!("tau_eff denominator {denom} is not positive")));
    }
    Ok(params.delta_gt / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g4(delta_gt: f64, delta_lt: f64) -> Greedy4Params {
        Greedy4Params { theta_gt: 1.5, theta_lt: 1.6, delta_gt, delta_lt, alpha_threshold: 0.0 }
    }

    #[test]
    fn tau_effective_examples() {
        assert_eq!(tau_effective(&g4(1.5, 1.5), 20.0, 1.0).unwrap(), 1.5 / 20.0);
        assert_eq!(tau_effective(&g4(1.5, 1.6), 20.0, 0.0).unwrap(), 1.5 / 20.0);
        let t = tau_effective(&g4(1.5, 1.6), 20.0, 1.0).unwrap();
        assert!((t - 1.5 / 19.9).abs() < 1e-15);
        assert!((t - 0.075377).abs() < 1e-6);
        assert!(tau_effective(&g4(1.0, 30.0), 20.0, 1.0).is_err());
    }

    #[test]
    fn two_means_separates_clusters() {
        let (lo, hi) = two_means(&[0.1, 0.12, 0.11, 2.0, 2.1, 1.9]).unwrap();
        assert!((lo - 0.11).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert!(two_means(&[1.0, 1.0, 1.0]).is_err());
        assert!(two_means(&[1.0]).is_err());
    }

    #[test]
    fn synthetic_fixture_recovers_group_means() {
        let k = 20.0;
        let traj: Vec<GreedyStep> = (0..40)
            .map(|i| {
                if i % 4 == 3 {
                    GreedyStep { alpha: -0.3, theta: -1.61, tau: 1.62 / k }
                } else {
                    GreedyStep { alpha: 0.9, theta: if i % 2 == 0 { 1.57 } else { -1.57 }, tau: 1.55 / k }
                }
            })
            .collect();
        let p = extract_greedy4_params(&[traj.clone(), traj], 5, k).unwrap();
        assert!((p.theta_gt - 1.57).abs() < 1e-12);
        assert!((p.theta_lt - 1.61).abs() < 1e-12);
        assert!((p.delta_gt - 1.55).abs() < 1e-12);
        assert!((p.delta_lt - 1.62).abs() < 1e-12);
        assert!((p.alpha_threshold - 0.3).abs() < 1e-12);
    }

    #[test]
    fn transient_must_be_discarded() {
        let traj = vec![GreedyStep { alpha: 0.0, theta: 1.0, tau: 0.1 }; 10];
        assert!(extract_greedy4_params(&[traj], 1, 20.0).is_err());
    }
}
