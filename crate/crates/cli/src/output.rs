//! Tables, their CSV form and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
}

/// Column-typed numeric table; integer columns are stored as whole floats.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<(String, Kind)>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[(&str, Kind)]) -> Self {
        Self { columns: columns.iter().map(|(n, k)| (n.to_string(), *k)).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.0.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            for (j, (v, (_, kind))) in row.iter().zip(&self.columns).enumerate() {
                if j > 0 {
                    out.push(',');
                }
                match kind {
                    Kind::Int => write!(out, "{}", *v as i64),
                    // Debug prints the shortest string that parses back exactly
                    Kind::Float => write!(out, "{v:?}"),
                }
                .expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn summaries(&self) -> Vec<ColumnSummary> {
        self.columns
            .iter()
            .enumerate()
            .map(|(j, (name, _))| ColumnSummary::of(name, self.rows.iter().map(|r| r[j])))
            .collect()
    }
}

/// Summary of the finite values of one column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub count: usize,
    pub n_finite: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

impl ColumnSummary {
    pub fn of(name: &str, values: impl Iterator<Item = f64>) -> Self {
        let (mut count, mut n_finite, mut sum) = (0, 0, 0.0);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            count += 1;
            if v.is_finite() {
                n_finite += 1;
                sum += v;
                min = min.min(v);
                max = max.max(v);
            }
        }
        let some = |x: f64| (n_finite > 0).then_some(x);
        Self {
            name: name.to_string(),
            count,
            n_finite,
            min: some(min),
            max: some(max),
            mean: some(sum / n_finite.max(1) as f64),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub code_version: String,
    pub config_hash: String,
    pub csv: String,
    pub rows: usize,
    pub columns: Vec<ColumnSummary>,
    pub config: serde_json::Value,
}

/// First 12 hex digits of the SHA-256 of the resolved config.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_string(config)?;
    let digest = Sha256::digest(json.as_bytes());
    Ok(digest.iter().take(6).map(|b| format!("{b:02x}")).collect())
}

/// Writes `<experiment>_<hash>.csv` and `<experiment>_<hash>.json` into the
/// output directory and returns their paths.
pub fn write(config: &ExperimentConfig, table: &Table) -> Result<(PathBuf, PathBuf)> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let hash = config_hash(config)?;
    let stem = format!("{}_{hash}", config.experiment);
    let csv_path = dir.join(format!("{stem}.csv"));
    let manifest_path = dir.join(format!("{stem}.json"));
    let manifest = Manifest {
        experiment: config.experiment.clone(),
        code_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        config_hash: hash,
        csv: file_name(&csv_path),
        rows: table.rows.len(),
        columns: table.summaries(),
        config: serde_json::to_value(config)?,
    };
    fs::write(&csv_path, table.to_csv()).with_context(|| format!("writing {}", csv_path.display()))?;
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(&manifest_path, json).with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok((csv_path, manifest_path))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
