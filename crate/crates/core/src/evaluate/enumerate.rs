//! Expected coherence by enumerating every measurement record.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::policy::{Policy, SpecPolicy};
use super::{interpolate, CoherenceSeries};
use crate::bayes_maps::{h_matrix, ComplexMap2, HTriple, MeasurementSetting, Outcome, SensitivityPair};
use crate::rtp::{steady_state, Matrix2, RtpParams};
use crate::state::{complex_coherence, CoherenceVector, TrackedProbability, TrackedVector};
use crate::strategies::{PolicyState, StrategySpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    /// Largest number of measurements accepted; the cost grows as `2^n`.
    pub max_steps: usize,
    /// Records less likely than this are dropped and their mass reported.
    pub prune_threshold: f64,
    /// Subtrees rooted at this depth are evaluated in parallel.
    pub split_depth: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { max_steps: 22, prune_threshold: 1e-14, split_depth: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub series: CoherenceSeries,
    /// Probability of the records dropped by pruning.
    pub pruned_mass: f64,
    /// Probability of all complete records plus the pruned mass; one up to
    /// rounding.
    pub total_probability: f64,
}

/// `C(t_n) = sum over records Y_n of |I^T A(Y_n)|`, for `n = 0..=n_steps`.
pub fn exact_expected_coherence(
    spec: &StrategySpec,
    n_steps: usize,
    params: &RtpParams,
    sens: &SensitivityPair,
) -> Result<Enumeration> {
    spec.validate()?;
    let policy = SpecPolicy::new(*spec, *params, *sens);
    exact_expected_coherence_with(&policy, n_steps, params, sens, &EnumerationOptions::default())
}

/// Enumeration for any [`Policy`]. When waiting times differ between records,
/// every record's conditional coherence path is interpolated linearly onto a
/// common grid before averaging.
pub fn exact_expected_coherence_with(
    policy: &dyn Policy,
    n_steps: usize,
    params: &RtpParams,
    sens: &SensitivityPair,
    options: &EnumerationOptions,
) -> Result<Enumeration> {
    if n_steps > options.max_steps {
        return Err(Error::TooManySteps { n: n_steps, cap: options.max_steps });
    }
    let uniform = policy.uniform_wait();
    let step = uniform.unwrap_or_else(|| policy.grid_step());
    let grid: Vec<f64> = (0..=n_steps).map(|n| n as f64 * step).collect();

    let ss = steady_state(params);
    let root = Node {
        step: 0,
        time: 0.0,
        a: TrackedVector::new(CoherenceVector::from_probabilities(ss))?,
        p: TrackedProbability::new(ss),
    };

    let context = Context { policy, params, sens, n_steps, uniform, grid: &grid, options };
    let split = options.split_depth.min(n_steps);
    let mut main = Walker::new(&context, split);
    main.visit(root)?;

    let frontier = std::mem::take(&mut main.frontier);
    let parts: Vec<Tally> = frontier
        .into_par_iter()
        .map(|(node, path)| -> Result<Tally> {
            let mut w = Walker::new(&context, usize::MAX);
            w.path = path;
            for child in w.children(&node)? {
                w.visit(child)?;
            }
            Ok(w.tally)
        })
        .collect::<Result<_>>()?;

    let mut total = main.tally;
    for part in &parts {
        total.absorb(part);
    }

    let covered = if uniform.is_some() { f64::INFINITY } else { total.covered };
    let tol = 1e-9 * step;
    let keep = grid.iter().take_while(|&&t| t <= covered + tol).count();
    Ok(Enumeration {
        series: CoherenceSeries { times: grid[..keep].to_vec(), values: total.acc[..keep].to_vec() },
        pruned_mass: total.pruned,
        total_probability: total.leaf_mass + total.pruned,
    })
}

#[derive(Clone, Copy, Debug)]
struct Node {
    step: usize,
    time: f64,
    a: TrackedVector,
    p: TrackedProbability,
}

impl Node {
    /// Conditional coherence of the record leading here.
    fn conditional(&self) -> f64 {
        complex_coherence(&self.a.vector).norm() * (self.a.log_r - self.p.log_total).exp()
    }
}

struct Context<'a> {
    policy: &'a dyn Policy,
    params: &'a RtpParams,
    sens: &'a SensitivityPair,
    n_steps: usize,
    uniform: Option<f64>,
    grid: &'a [f64],
    options: &'a EnumerationOptions,
}

#[derive(Clone, Debug)]
struct Tally {
    acc: Vec<f64>,
    pruned: f64,
    leaf_mass: f64,
    covered: f64,
}

impl Tally {
    fn absorb(&mut self, other: &Tally) {
        for (a, b) in self.acc.iter_mut().zip(&other.acc) {
            *a += b;
        }
        self.pruned += other.pruned;
        self.leaf_mass += other.leaf_mass;
        self.covered = self.covered.min(other.covered);
    }
}

struct Maps {
    key: (u64, u64),
    f: Vec<ComplexMap2>,
    check: Vec<Matrix2>,
}

struct Walker<'c, 'a> {
    ctx: &'c Context<'a>,
    stop_depth: usize,
    cache: Vec<Maps>,
    tally: Tally,
    path: Vec<(f64, f64)>,
    frontier: Vec<(Node, Vec<(f64, f64)>)>,
}

const CACHE_SIZE: usize = 16;

impl<'c, 'a> Walker<'c, 'a> {
    fn new(ctx: &'c Context<'a>, stop_depth: usize) -> Self {
        Self {
            ctx,
            stop_depth,
            cache: Vec::new(),
            tally: Tally {
                acc: vec![0.0; ctx.grid.len()],
                pruned: 0.0,
                leaf_mass: 0.0,
                covered: f64::INFINITY,
            },
            path: Vec::with_capacity(ctx.n_steps + 1),
            frontier: Vec::new(),
        }
    }

    fn maps(&mut self, mu: &MeasurementSetting) -> usize {
        let key = (mu.theta.to_bits(), mu.tau.to_bits());
        if let Some(i) = self.cache.iter().position(|m| m.key == key) {
            return i;
        }
        let (params, sens) = (self.ctx.params, self.ctx.sens);
        let entry = if self.ctx.policy.measures() {
            let full = HTriple::new(params, sens, mu.tau);
            let prob = HTriple::new(params, &sens.probability_limit(), mu.tau);
            Maps {
                key,
                f: Outcome::BOTH.iter().map(|&y| full.f(mu.theta, y)).collect(),
                check: Outcome::BOTH.iter().map(|&y| prob.f(mu.theta, y).re()).collect(),
            }
        } else {
            Maps {
                key,
                f: vec![h_matrix(params, mu.tau, sens.kappa)],
                check: vec![h_matrix(params, mu.tau, 0.0).re()],
            }
        };
        if self.cache.len() == CACHE_SIZE {
            self.cache.remove(0);
        }
        self.cache.push(entry);
        self.cache.len() - 1
    }

    fn children(&mut self, node: &Node) -> Result<Vec<Node>> {
        let state = PolicyState { step: node.step, vector: node.a.vector };
        let mu = self.ctx.policy.setting(&state)?;
        let time = match self.ctx.uniform {
            Some(w) => (node.step + 1) as f64 * w,
            None => node.time + mu.tau,
        };
        let i = self.maps(&mu);
        let maps = &self.cache[i];
        let mut out = Vec::with_capacity(maps.f.len());
        for (f, check) in maps.f.iter().zip(&maps.check) {
            let Some(p) = node.p.update(check) else { continue };
            let a = match node.a.update(f) {
                Ok(a) => a,
                Err(Error::DegenerateRecord) => TrackedVector { vector: node.a.vector, log_r: f64::NEG_INFINITY },
                Err(e) => return Err(e),
            };
            out.push(Node { step: node.step + 1, time, a, p });
        }
        Ok(out)
    }

    fn visit(&mut self, node: Node) -> Result<()> {
        self.path.push((node.time, node.conditional()));
        if self.ctx.uniform.is_some() {
            self.tally.acc[node.step] += complex_coherence(&node.a.vector).norm() * node.a.log_r.exp();
        }
        let weight = node.p.probability();
        if node.step == self.ctx.n_steps {
            self.tally.leaf_mass += weight;
            self.tally.covered = self.tally.covered.min(node.time);
            self.deposit(weight);
        } else if node.step > 0 && weight < self.ctx.options.prune_threshold {
            self.tally.pruned += weight;
            self.deposit(weight);
        } else if node.step == self.stop_depth {
            self.frontier.push((node, self.path.clone()));
        } else {
            for child in self.children(&node)? {
                self.visit(child)?;
            }
        }
        self.path.pop();
        Ok(())
    }

    /// Adds a finished record's interpolated path to the grid sums.
    fn deposit(&mut self, weight: f64) {
        if self.ctx.uniform.is_some() || weight == 0.0 {
            return;
        }
        let (times, values): (Vec<f64>, Vec<f64>) = self.path.iter().copied().unzip();
        let end = *times.last().expect("non-empty path");
        let mut hint = 0;
        for (j, &t) in self.ctx.grid.iter().enumerate() {
            if t > end {
                break;
            }
            self.tally.acc[j] += weight * interpolate(&times, &values, t, &mut hint);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::coherence_nc;
    use crate::strategies::Greedy4Params;
    use std::f64::consts::FRAC_PI_2;

    fn setup() -> (RtpParams, SensitivityPair) {
        (RtpParams::symmetric(1.0).unwrap(), SensitivityPair::new(0.2, 20.0).unwrap())
    }

    #[test]
    fn single_step_by_hand() {
        let (p, s) = setup();
        let spec = StrategySpec::NonAdaptive { theta: 0.9, tau: 0.07 };
        let e = exact_expected_coherence(&spec, 1, &p, &s).unwrap();
        let mu = MeasurementSetting::new(0.9, 0.07).unwrap();
        let a0 = CoherenceVector::from_probabilities(steady_state(&p));
        let by_hand: f64 = Outcome::BOTH
            .iter()
            .map(|&y| {
                let f = crate::bayes_maps::f_map(&p, &s, &mu, y);
                complex_coherence(&CoherenceVector::from_array(f.apply(a0.as_array()))).norm()
            })
            .sum();
        assert!((e.series.values[1] - by_hand).abs() < 1e-15);
        assert_eq!(e.series.values[0], 1.0);
    }

    #[test]
    fn no_control_reduces_to_baseline() {
        let (p, s) = setup();
        let e = exact_expected_coherence(&StrategySpec::NoControl, 12, &p, &s).unwrap();
        for (t, c) in e.series.times.iter().zip(&e.series.values) {
            assert!((c - coherence_nc(&p, 0.2, *t)).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_is_conserved() {
        let (p, s) = setup();
        let g4 = Greedy4Params {
            theta_gt: 1.57,
            theta_lt: 1.61,
            delta_gt: 1.55,
            delta_lt: 1.6,
            alpha_threshold: 0.3,
        };
        for spec in [
            StrategySpec::NonAdaptive { theta: FRAC_PI_2, tau: 0.05 },
            StrategySpec::ThetaFamily { big_theta: 1.50055 },
            StrategySpec::Greedy4(g4),
        ] {
            let e = exact_expected_coherence(&spec, 10, &p, &s).unwrap();
            assert!((e.total_probability - 1.0).abs() < 1e-10, "{spec:?}");
            assert_eq!(e.series.len(), 11);
        }
    }

    #[test]
    fn split_depth_does_not_change_results() {
        let (p, s) = setup();
        let spec = StrategySpec::ThetaFamily { big_theta: 1.2 };
        let policy = SpecPolicy::new(spec, p, s);
        let serial = EnumerationOptions { split_depth: 0, ..Default::default() };
        let parallel = EnumerationOptions { split_depth: 4, ..Default::default() };
        let a = exact_expected_coherence_with(&policy, 9, &p, &s, &serial).unwrap();
        let b = exact_expected_coherence_with(&policy, 9, &p, &s, &parallel).unwrap();
        for (x, y) in a.series.values.iter().zip(&b.series.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn step_cap() {
        let (p, s) = setup();
        let r = exact_expected_coherence(&StrategySpec::ThetaFamily { big_theta: 1.0 }, 23, &p, &s);
        assert_eq!(r, Err(Error::TooManySteps { n: 23, cap: 22 }));
    }
}
