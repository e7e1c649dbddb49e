// SPDX-License-Identifier: Apache-2.0

//! Protocol description shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_algebra::SpinRepresentation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Excited,
    Ground,
}

/// One charger (ensemble 0) and `M` batteries (ensembles `1..=M`), battery
/// `m` sharing reservoir `m` with the charger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_charger: usize,
    pub battery_sizes: Vec<usize>,
    pub gamma_down: f64,
    pub gamma_up: f64,
    /// Thermal occupation of every reservoir; 0 is the zero-temperature case.
    pub nbar: f64,
    /// Per ensemble, charger first.
    pub initial_levels: Vec<Level>,
    pub tau_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub output_stride: f64,
}

pub const DEFAULT_TAU_MAX: f64 = 50.0;
pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_ATOL: f64 = 1e-10;
pub const DEFAULT_OUTPUT_STRIDE: f64 = 0.1;

impl ScenarioConfig {
    /// Charger excited, batteries ground, zero temperature, default controls.
    pub fn new(
        n_charger: usize,
        battery_sizes: Vec<usize>,
        gamma_down: f64,
        gamma_up: f64,
    ) -> Self {
        let initial_levels = default_levels(battery_sizes.len());
        Self {
            n_charger,
            battery_sizes,
            gamma_down,
            gamma_up,
            nbar: 0.0,
            initial_levels,
            tau_max: DEFAULT_TAU_MAX,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            output_stride: DEFAULT_OUTPUT_STRIDE,
        }
    }

    pub fn n_batteries(&self) -> usize {
        self.battery_sizes.len()
    }

    pub fn n_ensembles(&self) -> usize {
        1 + self.battery_sizes.len()
    }

    /// Spin counts, charger first.
    pub fn ensemble_sizes(&self) -> Vec<usize> {
        std::iter::once(self.n_charger)
            .chain(self.battery_sizes.iter().copied())
            .collect()
    }

    pub fn representations(&self) -> Result<Vec<SpinRepresentation>> {
        self.ensemble_sizes()
            .into_iter()
            .map(SpinRepresentation::new)
            .collect()
    }

    /// Column labels `E_C, E_B1, ..`.
    pub fn ensemble_labels(&self) -> Vec<String> {
        std::iter::once("C".to_string())
            .chain((1..=self.n_batteries()).map(|m| format!("B{m}")))
            .collect()
    }

    /// Rate that converts physical time to scaled time:
    /// `tau = N_C * gamma_down * t`, or `gamma_up * t` without dissipation.
    pub fn time_scale(&self) -> f64 {
        if self.gamma_down > 0.0 {
            self.n_charger as f64 * self.gamma_down
        } else {
            self.gamma_up
        }
    }

    /// Resize the battery list, keeping the first battery's size and level.
    pub fn with_reservoirs(mut self, m: usize) -> Self {
        let size = self.battery_sizes.first().copied().unwrap_or(1);
        let level = self.initial_levels.get(1).copied().unwrap_or(Level::Ground);
        self.battery_sizes = vec![size; m];
        self.initial_levels.resize(1, Level::Excited);
        self.initial_levels.extend(std::iter::repeat_n(level, m));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_charger == 0 {
            return Err(Error::invalid("n_charger", "must be at least 1"));
        }
        if self.battery_sizes.is_empty() {
            return Err(Error::invalid("battery_sizes", "need at least one battery"));
        }
        if let Some(pos) = self.battery_sizes.iter().position(|&n| n == 0) {
            return Err(Error::invalid(
                "battery_sizes",
                format!("battery {} has zero spins", pos + 1),
            ));
        }
        for (name, v) in [
            ("gamma_down", self.gamma_down),
            ("gamma_up", self.gamma_up),
            ("nbar", self.nbar),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if self.gamma_down == 0.0 && self.gamma_up == 0.0 {
            return Err(Error::invalid(
                "gamma_down",
                "gamma_down and gamma_up cannot both be zero",
            ));
        }
        if self.initial_levels.len() != self.n_ensembles() {
            return Err(Error::invalid(
                "initial_levels",
                format!(
                    "expected {} entries (charger first), got {}",
                    self.n_ensembles(),
                    self.initial_levels.len()
                ),
            ));
        }
        for (name, v) in [
            ("tau_max", self.tau_max),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("output_stride", self.output_stride),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if self.output_stride > self.tau_max {
            return Err(Error::invalid("output_stride", "larger than tau_max"));
        }
        Ok(())
    }

    /// Uniform output grid `0, stride, .., tau_max` (last point clipped to `tau_max`).
    pub fn tau_grid(&self) -> Vec<f64> {
        let n = (self.tau_max / self.output_stride + 1e-9).floor() as usize;
        let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * self.output_stride).collect();
        if self.tau_max - grid[n] > 1e-9 * self.tau_max {
            grid.push(self.tau_max);
        }
        grid
    }
}

pub fn default_levels(n_batteries: usize) -> Vec<Level> {
    std::iter::once(Level::Excited)
        .chain(std::iter::repeat_n(Level::Ground, n_batteries))
        .collect()
}
