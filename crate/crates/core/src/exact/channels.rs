// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;
use crate::spin_algebra::{embed, SpinRepresentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Raise,
    Lower,
}

/// `coeff * J_ensemble^±`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpTerm {
    pub ensemble: usize,
    pub ladder: Ladder,
    pub coeff: f64,
}

/// One dissipator `rate * L[O]` with `O` a sum of collective ladder operators
/// that all move in the same direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    pub terms: Vec<JumpTerm>,
    pub rate: f64,
}

impl LindbladChannel {
    pub fn new(terms: Vec<JumpTerm>, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::invalid(
                "rate",
                format!("must be finite and >= 0, got {rate}"),
            ));
        }
        if terms.is_empty() {
            return Err(Error::invalid("terms", "jump operator has no terms"));
        }
        if terms.iter().any(|t| t.ladder != terms[0].ladder) {
            return Err(Error::invalid(
                "terms",
                "jump operator mixes raising and lowering terms",
            ));
        }
        Ok(Self { terms, rate })
    }

    /// `sum_mu J_mu^-` over `ensembles`, unit coefficients.
    pub fn collective(ladder: Ladder, ensembles: &[usize], rate: f64) -> Result<Self> {
        let terms = ensembles
            .iter()
            .map(|&ensemble| JumpTerm {
                ensemble,
                ladder,
                coeff: 1.0,
            })
            .collect();
        Self::new(terms, rate)
    }

    pub fn ladder(&self) -> Ladder {
        self.terms[0].ladder
    }

    /// Change of the joint de-excitation count produced by the jump.
    pub fn level_shift(&self) -> isize {
        match self.ladder() {
            Ladder::Lower => 1,
            Ladder::Raise => -1,
        }
    }

    pub fn check_ensembles(&self, n_ensembles: usize) -> Result<()> {
        match self.terms.iter().find(|t| t.ensemble >= n_ensembles) {
            Some(t) => Err(Error::invalid(
                "channels",
                format!(
                    "channel references ensemble {} but only {n_ensembles} exist",
                    t.ensemble
                ),
            )),
            None => Ok(()),
        }
    }

    /// Dense jump matrix on the joint space.
    pub fn jump_matrix(&self, reps: &[SpinRepresentation]) -> Result<DMatrix<f64>> {
        self.check_ensembles(reps.len())?;
        let dims: Vec<usize> = reps.iter().map(|r| r.dim()).collect();
        let d: usize = dims.iter().product();
        let mut out = DMatrix::zeros(d, d);
        for t in &self.terms {
            let ops = reps[t.ensemble].operators();
            let local = match t.ladder {
                Ladder::Raise => ops.plus,
                Ladder::Lower => ops.minus,
            };
            out += embed(&local, t.ensemble, &dims)? * t.coeff;
        }
        Ok(out)
    }
}

/// Channels of the charger/battery master equation: one collective decay
/// channel `J_C^- + J_Bm^-` per reservoir, its thermal absorption partner when
/// `nbar > 0`, and the collective pump `J_C^+` when `gamma_up > 0`.
pub fn build_channels(scenario: &ScenarioConfig) -> Result<Vec<LindbladChannel>> {
    let nbar = scenario.nbar;
    for (name, v) in [
        ("gamma_down", scenario.gamma_down),
        ("gamma_up", scenario.gamma_up),
        ("nbar", nbar),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(
                name,
                format!("must be finite and >= 0, got {v}"),
            ));
        }
    }
    if scenario.battery_sizes.is_empty() {
        return Err(Error::invalid("battery_sizes", "need at least one battery"));
    }
    let mut channels = Vec::new();
    if scenario.gamma_down > 0.0 {
        for m in 1..=scenario.n_batteries() {
            channels.push(LindbladChannel::collective(
                Ladder::Lower,
                &[0, m],
                scenario.gamma_down * (nbar + 1.0),
            )?);
            if nbar > 0.0 {
                channels.push(LindbladChannel::collective(
                    Ladder::Raise,
                    &[0, m],
                    scenario.gamma_down * nbar,
                )?);
            }
        }
    }
    if scenario.gamma_up > 0.0 {
        channels.push(LindbladChannel::collective(
            Ladder::Raise,
            &[0],
            scenario.gamma_up,
        )?);
    }
    Ok(channels)
}
