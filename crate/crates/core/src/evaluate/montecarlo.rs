//! Sampled measurement records.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::policy::{Policy, SpecPolicy};
use super::{interpolate, CoherenceSeries};
use crate::bayes_maps::{h_matrix, HTriple, MeasurementSetting, Outcome, SensitivityPair};
use crate::rtp::{steady_state, RtpParams};
use crate::state::{alpha, complex_coherence, zeta, CoherenceVector, TrackedProbability, TrackedVector};
use crate::strategies::{PolicyState, StrategySpec};
use crate::{Error, Result};

/// Sufficient statistics after a step, for phase-space plots. `alpha` is
/// NaN where it is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub step: usize,
    pub alpha: f64,
    pub zeta: f64,
    pub varphi: f64,
    pub log_r: f64,
    pub s: f64,
    /// Outcome that led to this point; `None` for the initial state.
    pub y: Option<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McTrajectory {
    /// Conditional coherence `|I^T A| / I^T A_check` after each step.
    pub series: CoherenceSeries,
    pub record: Vec<Outcome>,
    pub settings: Vec<MeasurementSetting>,
    pub path: Vec<PhasePoint>,
}

/// Independent random stream for trajectory `index` of a seeded batch; the
/// result does not depend on how trajectories are spread over threads.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn monte_carlo_trajectory<R: Rng + ?Sized>(
    spec: &StrategySpec,
    params: &RtpParams,
    sens: &SensitivityPair,
    n_steps: usize,
    rng: &mut R,
) -> Result<McTrajectory> {
    spec.validate()?;
    monte_carlo_trajectory_with(&SpecPolicy::new(*spec, *params, *sens), params, sens, n_steps, rng)
}

/// One record of `n_steps` measurements, each outcome drawn from its
/// probability given the record so far.
pub fn monte_carlo_trajectory_with<R: Rng + ?Sized>(
    policy: &dyn Policy,
    params: &RtpParams,
    sens: &SensitivityPair,
    n_steps: usize,
    rng: &mut R,
) -> Result<McTrajectory> {
    let ss = steady_state(params);
    let mut a = TrackedVector::new(CoherenceVector::from_probabilities(ss))?;
    let mut p = TrackedProbability::new(ss);
    let uniform = policy.uniform_wait();
    let mut time = 0.0;

    let mut times = vec![0.0];
    let mut values = vec![1.0];
    let mut record = Vec::with_capacity(n_steps);
    let mut settings = Vec::with_capacity(n_steps);
    let mut path = vec![phase_point(0, &a, sens, None)];

    for step in 0..n_steps {
        let mu = policy.setting(&PolicyState { step, vector: a.vector })?;
        if policy.measures() {
            let full = HTriple::new(params, sens, mu.tau);
            let prob = HTriple::new(params, &sens.probability_limit(), mu.tau);
            let null_map = prob.f(mu.theta, Outcome::Null).re();
            let p_null = {
                let next = crate::state::apply_real(&null_map, p.p);
                next[0] + next[1]
            };
            let y = if rng.random::<f64>() < p_null { Outcome::Null } else { Outcome::NonNull };
            p = p.update(&prob.f(mu.theta, y).re()).ok_or(Error::DegenerateRecord)?;
            a = a.update(&full.f(mu.theta, y))?;
            record.push(y);
            path.push(phase_point(step + 1, &a, sens, Some(y.bit())));
        } else {
            p = p.update(&h_matrix(params, mu.tau, 0.0).re()).ok_or(Error::DegenerateRecord)?;
            a = a.update(&h_matrix(params, mu.tau, sens.kappa))?;
            path.push(phase_point(step + 1, &a, sens, None));
        }
        time = match uniform {
            Some(w) => (step + 1) as f64 * w,
            None => time + mu.tau,
        };
        settings.push(mu);
        times.push(time);
        values.push(complex_coherence(&a.vector).norm() * (a.log_r - p.log_total).exp());
    }
    Ok(McTrajectory { series: CoherenceSeries { times, values }, record, settings, path })
}

fn phase_point(step: usize, a: &TrackedVector, sens: &SensitivityPair, y: Option<u8>) -> PhasePoint {
    PhasePoint {
        step,
        alpha: alpha(&a.vector, sens).unwrap_or(f64::NAN),
        zeta: zeta(&a.vector),
        varphi: complex_coherence(&a.vector).arg(),
        log_r: a.log_r,
        s: a.vector.sign(),
        y,
    }
}

/// Sample mean and standard error of the conditional coherence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub n_trajectories: usize,
}

pub fn monte_carlo_expected_coherence(
    spec: &StrategySpec,
    n_steps: usize,
    n_trajectories: usize,
    params: &RtpParams,
    sens: &SensitivityPair,
    seed: u64,
) -> Result<McEstimate> {
    spec.validate()?;
    let policy = SpecPolicy::new(*spec, *params, *sens);
    monte_carlo_expected_coherence_with(&policy, n_steps, n_trajectories, params, sens, seed)
}

/// Averages `n_trajectories` records on the same time grid as the exact
/// enumeration, interpolating when measurement times differ.
pub fn monte_carlo_expected_coherence_with(
    policy: &dyn Policy,
    n_steps: usize,
    n_trajectories: usize,
    params: &RtpParams,
    sens: &SensitivityPair,
    seed: u64,
) -> Result<McEstimate> {
    if n_trajectories < 2 {
        return Err(Error::InvalidParameter("need at least 2 trajectories".into()));
    }
    let uniform = policy.uniform_wait();
    let step = uniform.unwrap_or_else(|| policy.grid_step());
    let grid: Vec<f64> = (0..=n_steps).map(|n| n as f64 * step).collect();

    let samples: Vec<(Vec<f64>, f64)> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| -> Result<(Vec<f64>, f64)> {
            let traj = monte_carlo_trajectory_with(policy, params, sens, n_steps, &mut trajectory_rng(seed, i))?;
            let s = &traj.series;
            let end = *s.times.last().expect("non-empty");
            let values = if uniform.is_some() {
                s.values.clone()
            } else {
                let mut hint = 0;
                grid.iter()
                    .take_while(|&&t| t <= end)
                    .map(|&t| interpolate(&s.times, &s.values, t, &mut hint))
                    .collect()
            };
            Ok((values, end))
        })
        .collect::<Result<_>>()?;

    let covered = samples.iter().map(|s| s.0.len()).min().unwrap_or(0);
    let n = n_trajectories as f64;
    let mut mean = vec![0.0; covered];
    let mut sq = vec![0.0; covered];
    for (values, _) in &samples {
        for j in 0..covered {
            mean[j] += values[j];
            sq[j] += values[j] * values[j];
        }
    }
    let mut std_err = vec![0.0; covered];
    for j in 0..covered {
        mean[j] /= n;
        let var = ((sq[j] / n - mean[j] * mean[j]) * n / (n - 1.0)).max(0.0);
        std_err[j] = (var / n).sqrt();
    }
    Ok(McEstimate { times: grid[..covered].to_vec(), mean, std_err, n_trajectories })
}
