//! Experiment configuration: line-oriented `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! reported with a warning and skipped.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Identities,
    Symbols,
    GaugeSolve,
    Lorenz,
    Hodge,
    NonlinearHodge,
    Compensation,
    Kernel,
    All,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Identities,
        Command::Symbols,
        Command::GaugeSolve,
        Command::Lorenz,
        Command::Hodge,
        Command::NonlinearHodge,
        Command::Compensation,
        Command::Kernel,
        Command::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Symbols => "symbols",
            Command::GaugeSolve => "gauge-solve",
            Command::Lorenz => "lorenz",
            Command::Hodge => "hodge",
            Command::NonlinearHodge => "nonlinear-hodge",
            Command::Compensation => "compensation",
            Command::Kernel => "kernel",
            Command::All => "all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownCommand(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Torus dimension for suites that accept 3 or 4.
    pub dim: usize,
    /// Grid size; `None` means the per-dimension default.
    pub n: Option<usize>,
    pub seed: u64,
    /// RMS magnitude of generated fields.
    pub amplitude: f64,
    /// Highest generated wavenumber.
    pub bandwidth: usize,
    /// RMS magnitude of the generator `u` of gauge fields `exp(u)` in the
    /// identity checks.
    pub gauge_amplitude: f64,
    /// Bandwidth of that generator.
    pub gauge_bandwidth: usize,
    pub symbol_samples: usize,
    pub field_samples: usize,
    pub gauge_samples: usize,
    pub hodge_instances: usize,
    pub compensation_seeds: usize,
    pub compensation_grids: Vec<usize>,
    pub compensation_p: f64,
    pub kernel_k: usize,
    pub small_dq: f64,
    pub large_dq: f64,
    pub max_iter: usize,
    pub tol: f64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: Command::All,
            dim: 4,
            n: None,
            seed: 42,
            amplitude: 1.0,
            bandwidth: 2,
            gauge_amplitude: 0.25,
            gauge_bandwidth: 1,
            symbol_samples: 1000,
            field_samples: 20,
            gauge_samples: 100,
            hodge_instances: 20,
            compensation_seeds: 100,
            compensation_grids: vec![16, 24],
            compensation_p: 2.0,
            kernel_k: 1,
            small_dq: 0.05,
            large_dq: 1.0,
            max_iter: 50,
            tol: 1e-8,
            output: None,
        }
    }
}

/// Default grid size: 16 on the 4-torus, 24 on the 3-torus.
pub fn default_n(dim: usize) -> usize {
    if dim == 4 {
        16
    } else {
        24
    }
}

impl ExperimentConfig {
    /// Grid size to use on a `dim`-torus: the configured `N` when `dim`
    /// matches the configured dimension, the default otherwise.
    pub fn n_for(&self, dim: usize) -> usize {
        match self.n {
            Some(n) if dim == self.dim => n,
            _ => default_n(dim),
        }
    }

    /// Parse configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config { line, message: format!("expected `key = value`, got `{content}`") })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::Config { line, message: "empty key".into() });
            }
            cfg.set(key, value).map_err(|message| Error::Config { line, message })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        match key {
            "command" => self.command = value.parse().map_err(|e: Error| e.to_string())?,
            "grid.d" | "dim" => self.dim = num(key, value)?,
            "grid.N" | "grid.n" => self.n = Some(num(key, value)?),
            "seed" => self.seed = num(key, value)?,
            "amplitude" => self.amplitude = num(key, value)?,
            "bandwidth" => self.bandwidth = num(key, value)?,
            "gauge.amplitude" => self.gauge_amplitude = num(key, value)?,
            "gauge.bandwidth" => self.gauge_bandwidth = num(key, value)?,
            "samples.symbols" => self.symbol_samples = num(key, value)?,
            "samples.fields" => self.field_samples = num(key, value)?,
            "samples.gauge" => self.gauge_samples = num(key, value)?,
            "samples.hodge" => self.hodge_instances = num(key, value)?,
            "samples.compensation" => self.compensation_seeds = num(key, value)?,
            "compensation.grids" => {
                self.compensation_grids =
                    value.split(',').map(|v| num(key, v.trim())).collect::<std::result::Result<_, _>>()?
            }
            "compensation.p" => self.compensation_p = num(key, value)?,
            "kernel.K" | "kernel.k" => self.kernel_k = num(key, value)?,
            "hodge.small_dq" => self.small_dq = num(key, value)?,
            "hodge.large_dq" => self.large_dq = num(key, value)?,
            "hodge.max_iter" => self.max_iter = num(key, value)?,
            "hodge.tol" => self.tol = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => warn!("ignoring unknown configuration key `{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 3 && self.dim != 4 {
            return Err(Error::Parameter(format!("dimension must be 3 or 4, got {}", self.dim)));
        }
        if let Some(n) = self.n {
            crate::grid::GridSpec::new(self.dim, n)?;
        }
        for (name, a) in [("amplitude", self.amplitude), ("gauge.amplitude", self.gauge_amplitude)] {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {a}")));
            }
        }
        if !(self.compensation_p > 1.0 && self.compensation_p.is_finite()) {
            return Err(Error::Parameter(format!("compensation.p must lie in (1, inf), got {}", self.compensation_p)));
        }
        if self.compensation_grids.is_empty() {
            return Err(Error::Parameter("compensation.grids is empty".into()));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Parameter("hodge.tol must be positive and hodge.max_iter nonzero".into()));
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::parse(&text)
}
