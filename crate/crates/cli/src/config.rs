//! Run configuration files. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use sqcc_core::optimize::{FixedParams, SearchGrid, Variant};
use sqcc_core::oracle::{OracleSettings, Suite};
use sqcc_core::photon::{PhotonFixed, PhotonGrid};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Either an explicit list or an evenly spaced range, in dB.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LossRange {
    fn expand(&self) -> Result<Vec<f64>, CliError> {
        let LossRange { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step > 0.0 && stop >= start) {
            return Err(CliError::Config(format!(
                "loss_range needs finite start <= stop and step > 0 (got {start}, {stop}, {step})"
            )));
        }
        let n = (stop - start) / step;
        let count = n.round();
        if (n - count).abs() > 1e-9 * n.max(1.0) {
            return Err(CliError::Config("loss_range step does not divide stop - start".into()));
        }
        Ok((0..=count as usize).map(|i| start + step * i as f64).collect())
    }
}

fn loss_grid(list: &Option<Vec<f64>>, range: &Option<LossRange>) -> Result<Vec<f64>, CliError> {
    let losses = match (list, range) {
        (Some(l), None) => l.clone(),
        (None, Some(r)) => r.expand()?,
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give either losses_db or loss_range, not both".into()))
        }
        (None, None) => return Err(CliError::Config("missing losses_db or loss_range".into())),
    };
    if losses.is_empty() {
        return Err(CliError::Config("loss grid is empty".into()));
    }
    if let Some(bad) = losses.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(CliError::Config(format!("loss {bad} dB must be finite and >= 0")));
    }
    Ok(losses)
}

fn nonempty_finite(name: &str, values: &[f64], lo: f64) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Config(format!("{name} is empty")));
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= lo)) {
        return Err(CliError::Config(format!("{name} entry {bad} must be finite and >= {lo}")));
    }
    Ok(())
}

fn check_fixed(excess: f64, sigma: f64, beta: f64, theta: f64) -> Result<(), CliError> {
    if !(excess.is_finite() && excess >= 0.0) {
        return Err(CliError::Config(format!("excess_noise {excess} must be finite and >= 0")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(CliError::Config(format!("phase_noise {sigma} must be finite and >= 0")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(CliError::Config(format!("reconciliation {beta} outside [0, 1]")));
    }
    if !theta.is_finite() {
        return Err(CliError::Config("theta must be finite".into()));
    }
    Ok(())
}

/// Fields shared by every command. `seed` is accepted but unused: every
/// path is deterministic.
pub trait Common {
    fn out(&self) -> Option<&Path>;
    fn format(&self) -> Option<Format>;
}

macro_rules! common {
    ($t:ty) => {
        impl Common for $t {
            fn out(&self) -> Option<&Path> {
                self.out.as_deref()
            }
            fn format(&self) -> Option<Format> {
                self.format
            }
        }
    };
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variants: Vec<Variant>,
    pub alphas: Vec<f64>,
    pub losses_db: Option<Vec<f64>>,
    pub loss_range: Option<LossRange>,
    #[serde(default = "yes")]
    pub warm_start: bool,
    pub fixed: FixedParams,
    #[serde(default)]
    pub grid: SearchGrid,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[allow(dead_code)]
    pub seed: Option<u64>,
}
common!(SweepConfig);

fn yes() -> bool {
    true
}

impl SweepConfig {
    pub fn losses(&self) -> Result<Vec<f64>, CliError> {
        loss_grid(&self.losses_db, &self.loss_range)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.variants.is_empty() {
            return Err(CliError::Config("variants is empty".into()));
        }
        nonempty_finite("alphas", &self.alphas, 0.0)?;
        self.losses()?;
        let f = &self.fixed;
        check_fixed(f.excess_noise, f.phase_noise, f.reconciliation, f.theta)?;
        self.grid.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonConfig {
    pub loss_db: f64,
    pub excess_noise: f64,
    pub key_rates: Vec<f64>,
    pub max_bers: Vec<f64>,
    pub fixed: PhotonFixed,
    #[serde(default)]
    pub grid: PhotonGrid,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[allow(dead_code)]
    pub seed: Option<u64>,
}
common!(PhotonConfig);

impl PhotonConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        loss_grid(&Some(vec![self.loss_db]), &None)?;
        let f = &self.fixed;
        check_fixed(self.excess_noise, f.phase_noise, f.reconciliation, f.theta)?;
        nonempty_finite("key_rates", &self.key_rates, 0.0)?;
        nonempty_finite("max_bers", &self.max_bers, 0.0)?;
        if self.key_rates.contains(&0.0) {
            return Err(CliError::Config("key_rates entries must be > 0".into()));
        }
        if let Some(bad) = self.max_bers.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(CliError::Config(format!("max_bers entry {bad} outside (0, 1)")));
        }
        self.grid.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub suite: String,
    #[serde(default)]
    pub settings: OracleSettings,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[allow(dead_code)]
    pub seed: Option<u64>,
}
common!(OracleConfig);

impl OracleConfig {
    pub fn suite(&self) -> Result<Suite, CliError> {
        self.suite.parse().map_err(|_| {
            CliError::Config(format!(
                "unknown suite `{}` (expected scissor, ideal-nla or gaussian-core)",
                self.suite
            ))
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.suite()?;
        self.settings.validate().map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub losses_db: Option<Vec<f64>>,
    pub loss_range: Option<LossRange>,
    /// Mean photon numbers at which the finite-energy bound is evaluated.
    #[serde(default = "default_n_modes")]
    pub n_modes: Vec<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[allow(dead_code)]
    pub seed: Option<u64>,
}
common!(BoundsConfig);

fn default_n_modes() -> Vec<f64> {
    vec![1e6]
}

impl BoundsConfig {
    pub fn losses(&self) -> Result<Vec<f64>, CliError> {
        loss_grid(&self.losses_db, &self.loss_range)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.losses()?;
        nonempty_finite("n_modes", &self.n_modes, 0.0)
    }
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
