use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::expr::{Interval, SystemModel};
use crate::synth::{Method, SynthesisConfig};

/// On-disk run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    pub dimension: usize,
    pub dynamics: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    pub method: String,
    pub grid_spacing: Option<Vec<f64>>,
    pub points_per_segment: Option<usize>,
    pub linear_axis_spacing: Option<BTreeMap<usize, f64>>,
    pub alpha: Option<f64>,
    pub max_iterations: Option<usize>,
    pub prune_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Emission {
    pub mesh_json: bool,
    pub report: bool,
    pub svg: bool,
    pub dump_lp: bool,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub model: SystemModel,
    pub config: SynthesisConfig,
    /// Label of the initial mesh parameter, e.g. `0.25` or `n3`.
    pub init: String,
    pub out_dir: Option<PathBuf>,
    pub emit: Emission,
}

pub fn load_config(path: &Path) -> Result<RunSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    parse_config(&text)
}

/// Parses and validates configuration text, applying defaults.
pub fn parse_config(text: &str) -> Result<RunSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    file.into_spec()
}

fn field(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ConfigFile {
    pub fn into_spec(self) -> Result<RunSpec, CliError> {
        let n = self.dimension;
        if n == 0 {
            return Err(field("dimension", "must be at least 1"));
        }
        if self.dynamics.len() != n {
            return Err(field(
                "dynamics",
                format!("{} expressions for dimension {n}", self.dynamics.len()),
            ));
        }
        if self.domain.len() != n {
            return Err(field(
                "domain",
                format!("{} intervals for dimension {n}", self.domain.len()),
            ));
        }
        for (k, [lo, hi]) in self.domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(field(
                    format!("domain[{k}]"),
                    format!("invalid interval [{lo}, {hi}]"),
                ));
            }
        }
        let method: Method = self
            .method
            .parse()
            .map_err(|_| field("method", format!("unknown method {:?}", self.method)))?;
        let domain = self
            .domain
            .iter()
            .map(|&[lo, hi]| Interval::new(lo, hi))
            .collect();
        let model = SystemModel::new(self.name.clone(), &self.dynamics, domain)
            .map_err(|e| field("dynamics", e.to_string()))?;

        let defaults = SynthesisConfig::default();
        let config = SynthesisConfig {
            method,
            grid_spacing: self.grid_spacing.clone().unwrap_or_default(),
            points_per_segment: self
                .points_per_segment
                .unwrap_or(defaults.points_per_segment),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            max_iterations: self.max_iterations.unwrap_or(defaults.max_iterations),
            prune_radius: self.prune_radius.unwrap_or(defaults.prune_radius),
            linear_axis_spacing: self.linear_axis_spacing.clone().unwrap_or_default(),
        };
        if matches!(method, Method::Grid | Method::Method1) && self.grid_spacing.is_none() {
            return Err(field(
                "grid_spacing",
                format!("required for method {method}"),
            ));
        }
        if matches!(method, Method::Method2 | Method::Method3) && self.points_per_segment.is_none()
        {
            return Err(field(
                "points_per_segment",
                format!("required for method {method}"),
            ));
        }
        config.validate(n).map_err(|e| field("", e.to_string()))?;
        let init = match method {
            Method::Grid | Method::Method1 => format_spacing(&config.grid_spacing),
            Method::Method2 | Method::Method3 => format!("n{}", config.points_per_segment),
        };
        Ok(RunSpec {
            model,
            config,
            init,
            out_dir: None,
            emit: Emission::default(),
        })
    }
}

fn format_spacing(h: &[f64]) -> String {
    if h.windows(2).all(|w| w[0] == w[1]) {
        h.first().map(|v| format!("{v}")).unwrap_or_default()
    } else {
        h.iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join("x")
    }
}
