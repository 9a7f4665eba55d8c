//! Run configuration: TOML files, checked-in presets and command-line overrides.

use std::collections::HashSet;
use std::path::Path;

use qwalk_core::{InitialConditionSpec, TruncationOrder};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_RHO: f64 = 0.8;
pub const DEFAULT_DISPERSION_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Map,
    Spectral,
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Distribution,
    Moments,
    Flatness,
    Dispersion,
    Packets,
}

impl Output {
    fn needs_walk(self) -> bool {
        self != Output::Dispersion
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(deserialize_with = "qwalk_core::angle::deserialize")]
    pub theta: f64,
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConditionSpec>,
    #[serde(default)]
    pub t_max: u64,
    /// Defaults to `[t_max]`.
    #[serde(default)]
    pub sample_times: Vec<u64>,
    pub outputs: Vec<Output>,
    pub output_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationOrder>,
    /// Plateau fraction for the flatness report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion_samples: Option<usize>,
}

impl RunConfig {
    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(DEFAULT_RHO)
    }

    pub fn dispersion_samples(&self) -> usize {
        self.dispersion_samples.unwrap_or(DEFAULT_DISPERSION_SAMPLES)
    }

    /// Sorted, de-duplicated sample times.
    pub fn times(&self) -> Vec<u64> {
        let mut times = if self.sample_times.is_empty() {
            vec![self.t_max]
        } else {
            self.sample_times.clone()
        };
        times.sort_unstable();
        times.dedup();
        times
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(format!("{}: {msg}", self.output_path)));
        if self.outputs.is_empty() {
            return bad("outputs is empty".into());
        }
        if self.output_path.is_empty() {
            return bad("output_path is empty".into());
        }
        if let Some(t) = self.sample_times.iter().find(|&&t| t > self.t_max) {
            return bad(format!("sample time {t} exceeds t_max {}", self.t_max));
        }
        if self.engine == Engine::Continuum && self.truncation.is_none() {
            return bad("engine = \"continuum\" requires a truncation (1, 2, 3 or \"exact\")".into());
        }
        if self.outputs.iter().any(|o| o.needs_walk()) {
            match &self.initial {
                None => return bad("outputs other than dispersion need an [initial] table".into()),
                Some(spec) => spec.envelope.validate()?,
            }
        }
        if self.wants(Output::Flatness) && self.initial.as_ref().and_then(|i| i.envelope.sigma0).is_none() {
            return bad("flatness needs an envelope with sigma0".into());
        }
        if self.wants(Output::Packets) && self.times().len() < 2 {
            return bad("packets needs at least two sample times".into());
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho <= 1.0) {
                return bad(format!("rho = {rho} must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Parses a config file body: either one run, or shared keys plus a `[[runs]]` array
/// whose entries are merged over the shared keys.
pub fn parse(text: &str) -> Result<Vec<RunConfig>> {
    parse_with_overrides(text, &toml::Table::new())
}

/// Like [`parse`], then merges `overrides` over every run.
pub fn parse_with_overrides(text: &str, overrides: &toml::Table) -> Result<Vec<RunConfig>> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let runs = match table.remove("runs") {
        None => vec![toml::Value::Table(table)],
        Some(toml::Value::Array(runs)) => runs
            .into_iter()
            .map(|run| {
                let mut merged = toml::Value::Table(table.clone());
                merge(&mut merged, run);
                merged
            })
            .collect(),
        Some(_) => return Err(CliError::Config("`runs` must be an array of tables".into())),
    };
    runs.into_iter()
        .map(|mut run| {
            merge(&mut run, toml::Value::Table(overrides.clone()));
            run.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
        })
        .collect()
}

pub fn load(path: &Path, overrides: &toml::Table) -> Result<Vec<RunConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_with_overrides(&text, overrides).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Deep merge of TOML tables. A coin choice is one-of, so it is replaced rather than merged.
fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(base), toml::Value::Table(over)) => {
            for (key, value) in over {
                match base.get_mut(&key) {
                    Some(slot) if key != "coin" => merge(slot, value),
                    _ => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

pub const PRESETS: [(&str, &str); 4] = [
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b", include_str!("../presets/fig2b.toml")),
    ("fig2c", include_str!("../presets/fig2c.toml")),
];

pub fn preset(name: &str, overrides: &toml::Table) -> Result<Vec<RunConfig>> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Usage(format!("unknown preset {name:?}; available: {}", names.join(", ")))
    })?;
    parse_with_overrides(text, overrides)
}

/// Fails when two runs would write into the same directory.
pub fn check_distinct_outputs(runs: &[RunConfig]) -> Result<()> {
    let mut seen = HashSet::new();
    for run in runs {
        if !seen.insert(run.output_path.as_str()) {
            return Err(CliError::Config(format!("output_path {:?} is used by more than one run", run.output_path)));
        }
    }
    Ok(())
}
