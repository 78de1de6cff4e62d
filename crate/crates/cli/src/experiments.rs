//! Named experiments. Each one turns a resolved config into a table.

use anyhow::{anyhow, Context, Result};
use rtn_spectator::bayes_maps::SensitivityPair;
use rtn_spectator::evaluate::{
    asymptotic_nc_rates, coherence_nc, exact_expected_coherence, fit_rate, gamma_4state, h_theta,
    minimize_h_theta, monte_carlo_trajectory, scaled_rate, sweep_theta_tau, trajectory_rng,
    McTrajectory,
};
use rtn_spectator::strategies::{extract_greedy4_params, tau_effective, Greedy4Params, GreedyStep, StrategySpec};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExtractOptions};
use crate::output::{Kind, Table};

pub const MAX_ENUMERATED_STEPS: usize = 22;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    /// Draws random numbers, so a seed is required.
    pub stochastic: bool,
    pub uses_strategy: bool,
    /// Enumerates every record, so `n_steps` is capped.
    pub enumerates: bool,
    /// Samples `n_trajectories` records.
    pub samples: bool,
    pub run: fn(&ExperimentConfig) -> Result<Table>,
}

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "nc_curve",
        description: "coherence without control against its long-time exponential",
        stochastic: false,
        uses_strategy: false,
        enumerates: false,
        samples: false,
        run: nc_curve,
    },
    Experiment {
        name: "trajectories",
        description: "sampled conditional coherence paths of a strategy",
        stochastic: true,
        uses_strategy: true,
        enumerates: false,
        samples: true,
        run: trajectories,
    },
    Experiment {
        name: "exact_curve",
        description: "expected coherence of a strategy by enumerating every record",
        stochastic: false,
        uses_strategy: true,
        enumerates: true,
        samples: false,
        run: exact_curve,
    },
    Experiment {
        name: "rate_vs_K",
        description: "MOAAAR and Greedy4 rates, exact and closed form, against K",
        stochastic: true,
        uses_strategy: false,
        enumerates: true,
        samples: false,
        run: rate_vs_k,
    },
    Experiment {
        name: "greedy4_extract",
        description: "Greedy4 constants extracted from sampled Greedy records",
        stochastic: true,
        uses_strategy: false,
        enumerates: false,
        samples: false,
        run: greedy4_extract,
    },
    Experiment {
        name: "sweep",
        description: "exact rates over a grid of angles and waiting times",
        stochastic: true,
        uses_strategy: false,
        enumerates: true,
        samples: false,
        run: sweep,
    },
    Experiment {
        name: "phase_space",
        description: "sufficient statistics along sampled records",
        stochastic: true,
        uses_strategy: true,
        enumerates: false,
        samples: true,
        run: phase_space,
    },
    Experiment {
        name: "h_theta_scan",
        description: "asymptotic scaled rate of the Theta family against Theta",
        stochastic: false,
        uses_strategy: false,
        enumerates: false,
        samples: false,
        run: h_theta_scan,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

fn strategy(c: &ExperimentConfig) -> Result<StrategySpec> {
    c.strategy.ok_or_else(|| anyhow!("no [strategy] given"))
}

fn nc_curve(c: &ExperimentConfig) -> Result<Table> {
    let o = &c.nc_curve;
    let rate = asymptotic_nc_rates(&c.params, c.sensitivity.kappa).gamma;
    let mut table = Table::new(&[("t", Kind::Float), ("c_exact", Kind::Float), ("c_asymptotic", Kind::Float)]);
    for i in 0..o.n_points {
        let t = o.t_max * i as f64 / (o.n_points - 1) as f64;
        table.push(vec![t, coherence_nc(&c.params, c.sensitivity.kappa, t), (-rate * t).exp()]);
    }
    Ok(table)
}

fn sample(c: &ExperimentConfig, spec: &StrategySpec, sens: &SensitivityPair, n: usize, steps: usize) -> Result<Vec<McTrajectory>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| monte_carlo_trajectory(spec, &c.params, sens, steps, &mut trajectory_rng(c.seed(), i)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Into::into)
}

fn trajectories(c: &ExperimentConfig) -> Result<Table> {
    let spec = strategy(c)?;
    let records = sample(c, &spec, &c.sensitivity, c.n_trajectories, c.n_steps)?;
    let mut table = Table::new(&[
        ("trajectory", Kind::Int),
        ("step", Kind::Int),
        ("t", Kind::Float),
        ("coherence", Kind::Float),
        ("y", Kind::Int),
        ("theta", Kind::Float),
        ("tau", Kind::Float),
    ]);
    for (i, r) in records.iter().enumerate() {
        for n in 0..r.series.len() {
            let (y, theta, tau) = if n == 0 {
                (-1.0, f64::NAN, f64::NAN)
            } else {
                let mu = r.settings[n - 1];
                (r.record.get(n - 1).map_or(-1.0, |y| f64::from(y.bit())), mu.theta, mu.tau)
            };
            table.push(vec![i as f64, n as f64, r.series.times[n], r.series.values[n], y, theta, tau]);
        }
    }
    Ok(table)
}

fn exact_curve(c: &ExperimentConfig) -> Result<Table> {
    let spec = strategy(c)?;
    let e = exact_expected_coherence(&spec, c.n_steps, &c.params, &c.sensitivity)?;
    let mut table = Table::new(&[("t", Kind::Float), ("coherence", Kind::Float), ("decoherence", Kind::Float)]);
    for (t, v) in e.series.times.iter().zip(&e.series.values) {
        table.push(vec![*t, *v, 1.0 - v]);
    }
    Ok(table)
}

fn extract(c: &ExperimentConfig, sens: &SensitivityPair, o: &ExtractOptions) -> Result<Greedy4Params> {
    let spec = StrategySpec::GreedyFull { dt_scan: None };
    let records = sample(c, &spec, sens, o.n_trajectories, o.n_steps)?;
    let steps: Vec<Vec<GreedyStep>> = records
        .iter()
        .map(|r| {
            r.settings
                .iter()
                .zip(&r.path)
                .map(|(mu, point)| GreedyStep { alpha: point.alpha, theta: mu.theta, tau: mu.tau })
                .collect()
        })
        .collect();
    Ok(extract_greedy4_params(&steps, o.n_transient, sens.k_big)?)
}

fn greedy4_extract(c: &ExperimentConfig) -> Result<Table> {
    let g = extract(c, &c.sensitivity, &c.greedy4_extract)?;
    let mut table = Table::new(&[
        ("k_big", Kind::Float),
        ("theta_gt", Kind::Float),
        ("theta_lt", Kind::Float),
        ("delta_gt", Kind::Float),
        ("delta_lt", Kind::Float),
        ("alpha_threshold", Kind::Float),
        ("tau_effective", Kind::Float),
    ]);
    let tau_eff = tau_effective(&g, c.sensitivity.k_big, c.params.gamma_breve())?;
    table.push(vec![c.sensitivity.k_big, g.theta_gt, g.theta_lt, g.delta_gt, g.delta_lt, g.alpha_threshold, tau_eff]);
    Ok(table)
}

fn rate_vs_k(c: &ExperimentConfig) -> Result<Table> {
    let (theta_star, _) = minimize_h_theta();
    let mut table = Table::new(&[
        ("k_big", Kind::Float),
        ("moaaar_rate", Kind::Float),
        ("moaaar_closed_form", Kind::Float),
        ("moaaar_scaled", Kind::Float),
        ("greedy4_rate", Kind::Float),
        ("greedy4_closed_form", Kind::Float),
        ("greedy4_scaled", Kind::Float),
        ("theta_gt", Kind::Float),
        ("theta_lt", Kind::Float),
    ]);
    for &k in &c.rate_vs_k.k_values {
        let sens = SensitivityPair::new(c.sensitivity.kappa, k)?;
        let g = extract(c, &sens, &c.greedy4_extract).with_context(|| format!("Greedy4 extraction at K = {k}"))?;
        let mut row = vec![k];
        for spec in [StrategySpec::ThetaFamily { big_theta: theta_star }, StrategySpec::Greedy4(g)] {
            let e = exact_expected_coherence(&spec, c.n_steps, &c.params, &sens)?;
            let fit = fit_rate(&e.series, c.rate_vs_k.n_discard, None)?;
            row.push(fit.slope);
            row.push(gamma_4state(&spec, &c.params, &sens)?);
            row.push(scaled_rate(fit.slope, &c.params, &sens));
        }
        row.push(g.theta_gt);
        row.push(g.theta_lt);
        table.push(row);
    }
    Ok(table)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn sweep(c: &ExperimentConfig) -> Result<Table> {
    let o = &c.sweep;
    let k = c.sensitivity.k_big;
    let thetas = grid(o.theta_min, o.theta_max, o.n_theta);
    let taus: Vec<f64> = grid(o.k_tau_min, o.k_tau_max, o.n_tau).iter().map(|x| x / k).collect();
    let n_fit = o.n_fit.unwrap_or(c.n_steps - 1);
    let cells = sweep_theta_tau(&c.params, &c.sensitivity, &thetas, &taus, c.n_steps, n_fit);
    if let Some(bad) = cells.iter().find_map(|cell| cell.error.as_ref()) {
        return Err(anyhow!("sweep cell failed: {bad}"));
    }
    let mut table = Table::new(&[
        ("big_theta", Kind::Float),
        ("k_tau", Kind::Float),
        ("rate", Kind::Float),
        ("scaled_rate", Kind::Float),
        ("r_squared", Kind::Float),
        ("flagged", Kind::Int),
    ]);
    for cell in cells {
        table.push(vec![cell.big_theta, cell.k_tau, cell.rate, cell.scaled_rate, cell.r_squared, f64::from(u8::from(cell.flagged))]);
    }
    Ok(table)
}

fn phase_space(c: &ExperimentConfig) -> Result<Table> {
    let spec = strategy(c)?;
    let records = sample(c, &spec, &c.sensitivity, c.n_trajectories, c.n_steps)?;
    let mut table = Table::new(&[
        ("trajectory", Kind::Int),
        ("step", Kind::Int),
        ("alpha", Kind::Float),
        ("zeta", Kind::Float),
        ("varphi", Kind::Float),
        ("log_r", Kind::Float),
        ("s", Kind::Int),
        ("y", Kind::Int),
    ]);
    for (i, r) in records.iter().enumerate() {
        for p in &r.path {
            let y = p.y.map_or(-1.0, f64::from);
            table.push(vec![i as f64, p.step as f64, p.alpha, p.zeta, p.varphi, p.log_r, p.s, y]);
        }
    }
    Ok(table)
}

fn h_theta_scan(c: &ExperimentConfig) -> Result<Table> {
    let n = c.h_theta_scan.n_points;
    let mut thetas = grid(0.1, std::f64::consts::PI - 0.1, n);
    let (theta_star, _) = minimize_h_theta();
    let at = thetas.partition_point(|&t| t < theta_star);
    thetas.insert(at, theta_star);
    let mut table = Table::new(&[("theta", Kind::Float), ("h_theta", Kind::Float)]);
    for t in thetas {
        table.push(vec![t, h_theta(t)?]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rtn_spectator::evaluate::EnumerationOptions;

    #[test]
    fn names_are_unique() {
        for (i, a) in REGISTRY.iter().enumerate() {
            assert!(REGISTRY[i + 1..].iter().all(|b| b.name != a.name));
        }
    }

    #[test]
    fn cap_matches_library() {
        assert_eq!(EnumerationOptions::default().max_steps, MAX_ENUMERATED_STEPS);
    }
}
