// SPDX-License-Identifier: Apache-2.0

//! Scenario files (TOML). Every key of [`ScenarioConfig`] is accepted, plus
//! `method` and `label`; anything else is rejected so that misspelled rate
//! names do not silently fall back to defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::scenario::{
    default_levels, Level, ScenarioConfig, DEFAULT_ATOL, DEFAULT_OUTPUT_STRIDE, DEFAULT_RTOL,
    DEFAULT_TAU_MAX,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n_charger: usize,
    pub battery_sizes: Vec<usize>,
    pub gamma_down: f64,
    #[serde(default)]
    pub gamma_up: f64,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default)]
    pub initial_levels: Option<Vec<Level>>,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_stride")]
    pub output_stride: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub label: String,
}

fn default_tau_max() -> f64 {
    DEFAULT_TAU_MAX
}
fn default_rtol() -> f64 {
    DEFAULT_RTOL
}
fn default_atol() -> f64 {
    DEFAULT_ATOL
}
fn default_stride() -> f64 {
    DEFAULT_OUTPUT_STRIDE
}
fn default_method() -> Method {
    Method::Meanfield
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Validated scenario.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let sc = ScenarioConfig {
            n_charger: self.n_charger,
            battery_sizes: self.battery_sizes.clone(),
            gamma_down: self.gamma_down,
            gamma_up: self.gamma_up,
            nbar: self.nbar,
            initial_levels: self
                .initial_levels
                .clone()
                .unwrap_or_else(|| default_levels(self.battery_sizes.len())),
            tau_max: self.tau_max,
            rtol: self.rtol,
            atol: self.atol,
            output_stride: self.output_stride,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_scenario(sc: &ScenarioConfig, method: Method, label: &str) -> Self {
        Self {
            n_charger: sc.n_charger,
            battery_sizes: sc.battery_sizes.clone(),
            gamma_down: sc.gamma_down,
            gamma_up: sc.gamma_up,
            nbar: sc.nbar,
            initial_levels: Some(sc.initial_levels.clone()),
            tau_max: sc.tau_max,
            rtol: sc.rtol,
            atol: sc.atol,
            output_stride: sc.output_stride,
            method,
            label: label.to_string(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }
}
