//! Experiment configuration files and their validation.

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use rtn_spectator::bayes_maps::SensitivityPair;
use rtn_spectator::rtp::RtpParams;
use rtn_spectator::strategies::StrategySpec;
use serde::{Deserialize, Serialize};

use crate::experiments::{self, Experiment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based line in the config file, when the problem has one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.line {
            Some(line) => write!(f, "line {line}: {level}: {}", self.message),
            None => write!(f, "{level}: {}", self.message),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    n_steps: Option<usize>,
    n_trajectories: Option<usize>,
    params: Option<RawParams>,
    sensitivity: Option<RawSensitivity>,
    strategy: Option<toml::Value>,
    nc_curve: Option<NcCurveOptions>,
    rate_vs_k: Option<RateVsKOptions>,
    greedy4_extract: Option<ExtractOptions>,
    sweep: Option<SweepOptions>,
    h_theta_scan: Option<ScanOptions>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    gamma_up: f64,
    gamma_down: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensitivity {
    kappa: f64,
    k_big: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NcCurveOptions {
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for NcCurveOptions {
    fn default() -> Self {
        Self { t_max: 5.0, n_points: 101 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateVsKOptions {
    pub k_values: Vec<f64>,
    /// Leading points dropped before fitting.
    pub n_discard: usize,
}

impl Default for RateVsKOptions {
    fn default() -> Self {
        Self { k_values: vec![2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0], n_discard: 2 }
    }
}

/// How Greedy4 constants are extracted from sampled Greedy records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractOptions {
    pub n_trajectories: usize,
    pub n_steps: usize,
    pub n_transient: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { n_trajectories: 100, n_steps: 40, n_transient: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
    pub k_tau_min: f64,
    pub k_tau_max: f64,
    pub n_tau: usize,
    /// Points used by each fit, counted from the end; defaults to all but
    /// the first two.
    pub n_fit: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            theta_min: 1.4,
            theta_max: 1.6,
            n_theta: 30,
            k_tau_min: 1.4,
            k_tau_max: 1.6,
            n_tau: 30,
            n_fit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    pub n_points: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { n_points: 1001 }
    }
}

/// A fully resolved, validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub params: RtpParams,
    pub sensitivity: SensitivityPair,
    pub strategy: Option<StrategySpec>,
    pub nc_curve: NcCurveOptions,
    pub rate_vs_k: RateVsKOptions,
    pub greedy4_extract: ExtractOptions,
    pub sweep: SweepOptions,
    pub h_theta_scan: ScanOptions,
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// Command-line values that replace the ones in the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_N_STEPS: usize = 15;
pub const DEFAULT_N_TRAJECTORIES: usize = 1000;

/// Parses and checks a configuration. Returns the resolved config when
/// there are no errors, together with every diagnostic found.
pub fn load(text: &str, overrides: &Overrides) -> (Option<ExperimentConfig>, Vec<Diagnostic>) {
    let mut raw: RawConfig = match toml::from_str(text) {
        Ok(raw) => raw,
        Err(e) => {
            let line = e.span().map(|s| line_of(text, s));
            let message = e.message().trim().to_string();
            return (None, vec![Diagnostic { severity: Severity::Error, line, message }]);
        }
    };
    if let Some(seed) = overrides.seed {
        raw.seed = Some(seed);
    }
    if let Some(dir) = &overrides.output_dir {
        raw.output_dir = Some(dir.clone());
    }
    let mut checker = Checker { text, diagnostics: Vec::new() };
    let config = checker.resolve(raw);
    let mut diagnostics = checker.diagnostics;
    diagnostics.sort_by_key(|d| (d.line.unwrap_or(0), std::cmp::Reverse(d.severity)));
    let has_error = diagnostics.iter().any(|d| d.severity == Severity::Error);
    (if has_error { None } else { config }, diagnostics)
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[table]`, or at top level when `table` is `None`.
fn locate(text: &str, table: Option<&str>, key: Option<&str>) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(header) = trimmed.strip_prefix('[').and_then(|h| h.split(']').next()) {
            current = Some(header.trim().to_string());
            if key.is_none() && table == Some(header.trim()) {
                return Some(i + 1);
            }
            continue;
        }
        let Some(key) = key else { continue };
        if current.as_deref() != table {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
    diagnostics: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn push(&mut self, severity: Severity, table: Option<&str>, key: Option<&str>, message: String) {
        let line = locate(self.text, table, key).or_else(|| table.and_then(|t| locate(self.text, Some(t), None)));
        self.diagnostics.push(Diagnostic { severity, line, message });
    }

    fn error(&mut self, table: Option<&str>, key: &str, message: String) {
        self.push(Severity::Error, table, Some(key), message);
    }

    fn warn(&mut self, table: Option<&str>, key: &str, message: String) {
        self.push(Severity::Warning, table, Some(key), message);
    }

    fn positive(&mut self, table: Option<&str>, key: &str, v: f64) -> bool {
        let ok = v.is_finite() && v > 0.0;
        if !ok {
            self.error(table, key, format!("{key} must be > 0"));
        }
        ok
    }

    fn resolve(&mut self, raw: RawConfig) -> Option<ExperimentConfig> {
        let experiment = match raw.experiment.as_deref() {
            None => {
                self.diagnostics.push(Diagnostic {
                    severity: Severity::Error,
                    line: None,
                    message: "missing key `experiment`".into(),
                });
                None
            }
            Some(name) => match experiments::find(name) {
                Some(e) => Some(e),
                None => {
                    let known: Vec<&str> = experiments::REGISTRY.iter().map(|e| e.name).collect();
                    self.error(None, "experiment", format!("unknown experiment `{name}`; expected one of {}", known.join(", ")));
                    None
                }
            },
        };

        let params = match raw.params {
            None => {
                self.missing_table("params");
                None
            }
            Some(p) => {
                let up = self.positive(Some("params"), "gamma_up", p.gamma_up);
                let down = self.positive(Some("params"), "gamma_down", p.gamma_down);
                (up && down).then(|| RtpParams::new(p.gamma_up, p.gamma_down).expect("checked"))
            }
        };

        let sensitivity = match raw.sensitivity {
            None => {
                self.missing_table("sensitivity");
                None
            }
            Some(s) => {
                let kappa_ok = s.kappa.is_finite() && s.kappa >= 0.0;
                if !kappa_ok {
                    self.error(Some("sensitivity"), "kappa", "kappa must be >= 0".into());
                }
                let k_ok = self.positive(Some("sensitivity"), "k_big", s.k_big);
                if kappa_ok && k_ok && s.k_big < s.kappa {
                    self.warn(
                        Some("sensitivity"),
                        "k_big",
                        format!("k_big = {} is below kappa = {}; results are outside the regime kappa << gamma << k_big", s.k_big, s.kappa),
                    );
                }
                (kappa_ok && k_ok).then(|| SensitivityPair::new(s.kappa, s.k_big).expect("checked"))
            }
        };

        let strategy = match raw.strategy {
            None => None,
            Some(value) => match value.try_into::<StrategySpec>() {
                Ok(spec) => match spec.validate() {
                    Ok(()) => Some(spec),
                    Err(e) => {
                        let key = e.to_string().split_whitespace().find(|w| locate(self.text, Some("strategy"), Some(w)).is_some()).map(str::to_string);
                        self.push(Severity::Error, Some("strategy"), key.as_deref(), e.to_string());
                        None
                    }
                },
                Err(e) => {
                    self.push(Severity::Error, Some("strategy"), None, format!("invalid strategy: {}", e.message().trim()));
                    None
                }
            },
        };

        let n_steps = raw.n_steps.unwrap_or(DEFAULT_N_STEPS);
        let n_trajectories = raw.n_trajectories.unwrap_or(DEFAULT_N_TRAJECTORIES);
        let config = ExperimentConfig {
            experiment: raw.experiment.clone().unwrap_or_default(),
            seed: raw.seed,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("output")),
            n_steps,
            n_trajectories,
            params: params.unwrap_or_else(|| RtpParams::symmetric(1.0).expect("valid")),
            sensitivity: sensitivity.unwrap_or(SensitivityPair { kappa: 0.0, k_big: 1.0 }),
            strategy,
            nc_curve: raw.nc_curve.unwrap_or_default(),
            rate_vs_k: raw.rate_vs_k.unwrap_or_default(),
            greedy4_extract: raw.greedy4_extract.unwrap_or_default(),
            sweep: raw.sweep.unwrap_or_default(),
            h_theta_scan: raw.h_theta_scan.unwrap_or_default(),
        };
        if let Some(e) = experiment {
            self.check_experiment(e, &config, params.is_some());
        }
        Some(config)
    }

    fn missing_table(&mut self, table: &str) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            line: None,
            message: format!("missing table [{table}]"),
        });
    }

    fn check_experiment(&mut self, e: &Experiment, c: &ExperimentConfig, params_ok: bool) {
        if e.stochastic && c.seed.is_none() {
            self.error(None, "seed", format!("experiment `{}` needs a seed", e.name));
        }
        if e.uses_strategy && c.strategy.is_none() && locate(self.text, Some("strategy"), None).is_none() {
            self.missing_table("strategy");
        }
        if e.enumerates && c.n_steps > experiments::MAX_ENUMERATED_STEPS {
            self.error(
                None,
                "n_steps",
                format!("n_steps = {} exceeds {} for an exact enumeration", c.n_steps, experiments::MAX_ENUMERATED_STEPS),
            );
        }
        if e.samples && c.n_trajectories < 2 {
            self.error(None, "n_trajectories", "n_trajectories must be >= 2".into());
        }
        if c.n_steps == 0 {
            self.error(None, "n_steps", "n_steps must be > 0".into());
        }
        match e.name {
            "nc_curve" => {
                let o = &c.nc_curve;
                self.positive(Some("nc_curve"), "t_max", o.t_max);
                if o.n_points < 2 {
                    self.error(Some("nc_curve"), "n_points", "n_points must be >= 2".into());
                }
            }
            "rate_vs_K" => {
                if params_ok && !c.params.is_symmetric() {
                    self.error(Some("params"), "gamma_down", "rate_vs_K needs gamma_up == gamma_down".into());
                }
                if c.rate_vs_k.k_values.is_empty() {
                    self.error(Some("rate_vs_k"), "k_values", "k_values must not be empty".into());
                }
                for &k in &c.rate_vs_k.k_values {
                    if !(k.is_finite() && k > 0.0) {
                        self.error(Some("rate_vs_k"), "k_values", "k_values must all be > 0".into());
                        break;
                    }
                }
                if c.n_steps < c.rate_vs_k.n_discard + 3 {
                    self.error(None, "n_steps", "n_steps leaves fewer than 3 points to fit".into());
                }
                self.check_extract(&c.greedy4_extract);
            }
            "greedy4_extract" => self.check_extract(&c.greedy4_extract),
            "sweep" => {
                let o = &c.sweep;
                for (key, v) in [("theta_min", o.theta_min), ("theta_max", o.theta_max)] {
                    if !(v > 0.0 && v < std::f64::consts::PI) {
                        self.error(Some("sweep"), key, format!("{key} must lie in (0, pi)"));
                    }
                }
                for (key, v) in [("k_tau_min", o.k_tau_min), ("k_tau_max", o.k_tau_max)] {
                    self.positive(Some("sweep"), key, v);
                }
                for (key, n) in [("n_theta", o.n_theta), ("n_tau", o.n_tau)] {
                    if n == 0 {
                        self.error(Some("sweep"), key, format!("{key} must be > 0"));
                    }
                }
                let n_fit = o.n_fit.unwrap_or(c.n_steps.saturating_sub(1));
                if n_fit < 3 || n_fit > c.n_steps + 1 {
                    self.error(Some("sweep"), "n_fit", format!("n_fit must lie in 3..={}", c.n_steps + 1));
                }
            }
            "h_theta_scan" if c.h_theta_scan.n_points < 2 => {
                self.error(Some("h_theta_scan"), "n_points", "n_points must be >= 2".into());
            }
            _ => {}
        }
    }

    fn check_extract(&mut self, o: &ExtractOptions) {
        if o.n_transient < 2 {
            self.error(Some("greedy4_extract"), "n_transient", "n_transient must be >= 2".into());
        }
        if o.n_steps <= o.n_transient {
            self.error(Some("greedy4_extract"), "n_steps", "n_steps must exceed n_transient".into());
        }
        if o.n_trajectories == 0 {
            self.error(Some("greedy4_extract"), "n_trajectories", "n_trajectories must be > 0".into());
        }
    }
}
