//! Flat `key = value` experiment configuration files.
//!
//! ```text
//! # 8-spin default sweep
//! sites = 8
//! beta_lambda = 0.1, 0.2, 0.3, 0.4
//! partitions = 1, 2, 4
//! ```
//!
//! Blank lines and `#` comments are ignored; lists are comma separated.
//! Unset keys keep their defaults, unknown or repeated keys are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::experiments::ExperimentConfig;
use crate::{Error, Result};

pub const KEYS: &[&str] = &[
    "sites",
    "levels",
    "delta_e",
    "lambda",
    "beta_lambda",
    "partitions",
    "realizations",
    "base_seed",
    "bin_width",
    "envelope_amplitude",
    "fig2_realization",
];

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line: Some(line), message: message.into() }
}

fn scalar<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_error(line, format!("invalid value for `{key}`: `{value}`")))
}

fn list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| scalar(line, key, v.trim())).collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(config_error(line, format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(config_error(line, format!("duplicate key `{key}`")));
        }
        if value.is_empty() {
            return Err(config_error(line, format!("missing value for `{key}`")));
        }
        match key {
            "sites" => config.sites = scalar(line, key, value)?,
            "levels" => config.levels = scalar(line, key, value)?,
            "delta_e" => config.delta_e = scalar(line, key, value)?,
            "lambda" => config.lambda = scalar(line, key, value)?,
            "beta_lambda" => config.beta_lambda = list(line, key, value)?,
            "partitions" => config.partitions = list(line, key, value)?,
            "realizations" => config.realizations = scalar(line, key, value)?,
            "base_seed" => config.base_seed = scalar(line, key, value)?,
            "bin_width" => {
                config.bin_width = match value {
                    "auto" => None,
                    v => Some(scalar(line, key, v)?),
                }
            }
            "envelope_amplitude" => config.envelope_amplitude = scalar(line, key, value)?,
            "fig2_realization" => config.fig2_realization = scalar(line, key, value)?,
            _ => unreachable!("key list and match arms disagree"),
        }
    }
    config.validate().map_err(|e| match e {
        Error::InvalidArgument(message) => Error::Config { line: None, message },
        other => other,
    })?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

/// Serializes `config` so that [`parse_config`] reads it back unchanged.
pub fn render_config(config: &ExperimentConfig) -> String {
    let join = |v: Vec<String>| v.join(", ");
    let mut out = String::new();
    let _ = writeln!(out, "sites = {}", config.sites);
    let _ = writeln!(out, "levels = {}", config.levels);
    let _ = writeln!(out, "delta_e = {:?}", config.delta_e);
    let _ = writeln!(out, "lambda = {:?}", config.lambda);
    let _ = writeln!(out, "beta_lambda = {}", join(config.beta_lambda.iter().map(|b| format!("{b:?}")).collect()));
    let _ = writeln!(out, "partitions = {}", join(config.partitions.iter().map(|p| p.to_string()).collect()));
    let _ = writeln!(out, "realizations = {}", config.realizations);
    let _ = writeln!(out, "base_seed = {}", config.base_seed);
    match config.bin_width {
        Some(w) => {
            let _ = writeln!(out, "bin_width = {w:?}");
        }
        None => {
            let _ = writeln!(out, "bin_width = auto");
        }
    }
    let _ = writeln!(out, "envelope_amplitude = {:?}", config.envelope_amplitude);
    let _ = writeln!(out, "fig2_realization = {}", config.fig2_realization);
    out
}
