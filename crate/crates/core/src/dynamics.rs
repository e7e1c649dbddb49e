// SPDX-License-Identifier: Apache-2.0

//! Time integration in scaled time and the post-processing used for figures.
//!
//! Mean-field runs integrate normalized moments `z_mu / N_mu` and
//! `s_{mu nu} / (N_mu N_nu)`, so tolerances mean the same thing for ten spins
//! and for ten million. The second-order closure can push an ensemble
//! slightly below its ground level (by at most about one spin quantum at
//! small `N`). Such breaches are clamped when energies are reported; a
//! breach larger than one quantum aborts the run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    build_channels, check_capacity, evolve_exact_with, joint_dimension, ExactOptions,
    LiouvilleLayout,
};
pub use crate::moments::MomentState;
use crate::moments::{generate_moment_system, initial_moments};
use crate::ode::{Dopri5, Observer};
use crate::scenario::{Level, ScenarioConfig};
use crate::spin_algebra::ProductBasis;

pub const DEFAULT_STEADY_WINDOW: f64 = 0.2;
pub const DEFAULT_STEADY_TOL: f64 = 1e-3;
pub const DEFAULT_CHARGING_THRESHOLD: f64 = 0.9;
/// Number of times `run_to_steady` doubles `tau_max` before giving up.
pub const MAX_EXTENSIONS: usize = 4;

/// Slack on reported energy densities.
const ENERGY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Meanfield,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Meanfield => "meanfield",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "meanfield" => Ok(Method::Meanfield),
            other => Err(Error::invalid(
                "method",
                format!("expected `exact` or `meanfield`, got `{other}`"),
            )),
        }
    }
}

/// Energy-density series on a uniform grid in scaled time.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    pub tau: Vec<f64>,
    /// `energies[mu][k]` is `E_mu(tau[k])`, charger first.
    pub energies: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub method: Method,
    pub scenario: ScenarioConfig,
    /// Unclamped moments at every grid point (mean-field runs only).
    pub moments: Option<Vec<MomentState>>,
}

impl TrajectoryResult {
    pub fn n_ensembles(&self) -> usize {
        self.energies.len()
    }

    pub fn series(&self, ensemble: usize) -> &[f64] {
        &self.energies[ensemble]
    }

    pub fn final_energies(&self) -> Vec<f64> {
        self.energies
            .iter()
            .map(|e| *e.last().unwrap_or(&f64::NAN))
            .collect()
    }

    fn check_ensemble(&self, ensemble: usize) -> Result<()> {
        if ensemble >= self.n_ensembles() {
            return Err(Error::invalid(
                "ensemble",
                format!(
                    "index {ensemble} out of range for {} ensembles",
                    self.n_ensembles()
                ),
            ));
        }
        if self.tau.is_empty() {
            return Err(Error::invalid("trajectory", "empty trajectory"));
        }
        Ok(())
    }
}

fn clamp_energy(e: f64, ensemble: usize, tau: f64, slack: f64) -> Result<f64> {
    if !(-slack..=1.0 + slack).contains(&e) {
        return Err(Error::IntegrationFailure {
            tau,
            reason: format!("energy density of ensemble {ensemble} left [0, 1]: {e}"),
        });
    }
    Ok(e.clamp(0.0, 1.0))
}

/// Runs the chosen solver once on the scenario's grid.
pub fn integrate(scenario: &ScenarioConfig, method: Method) -> Result<TrajectoryResult> {
    match method {
        Method::Exact => integrate_exact(scenario),
        Method::Meanfield => integrate_meanfield(scenario),
    }
}

struct MeanfieldObserver<'a> {
    sizes: &'a [usize],
    tau: Vec<f64>,
    energies: Vec<Vec<f64>>,
    moments: Vec<MomentState>,
}

impl MeanfieldObserver<'_> {
    fn check(&self, t: f64, y: &[f64]) -> Result<()> {
        let n = self.sizes.len();
        let mut k = n;
        for a in 0..n {
            let quantum = 1.0 / self.sizes[a] as f64 + ENERGY_SLACK;
            let z = y[a];
            if !z.is_finite() || z.abs() > 0.5 + quantum {
                return Err(breach(t, format!("z of ensemble {a} = {z} (normalized)")));
            }
            for b in a..n {
                if a == b && y[k] < -quantum {
                    return Err(breach(
                        t,
                        format!("s of ensemble {a} = {} (normalized)", y[k]),
                    ));
                }
                k += 2;
            }
        }
        Ok(())
    }
}

fn breach(tau: f64, what: String) -> Error {
    Error::IntegrationFailure {
        tau,
        reason: format!("mean-field invariant breach: {what}"),
    }
}

impl Observer<f64> for MeanfieldObserver<'_> {
    fn output(&mut self, _index: usize, t: f64, y: &[f64]) -> Result<()> {
        self.check(t, y)?;
        self.tau.push(t);
        for (a, series) in self.energies.iter_mut().enumerate() {
            let quantum = 1.0 / self.sizes[a] as f64 + ENERGY_SLACK;
            series.push(clamp_energy(y[a] + 0.5, a, t, quantum)?);
        }
        let mut st = MomentState::from_flat(self.sizes.len(), y);
        normalize(&mut st, self.sizes, true);
        self.moments.push(st);
        Ok(())
    }

    fn accepted_step(&mut self, t: f64, y: &[f64], _dydt: &[f64]) -> Result<()> {
        self.check(t, y)
    }
}

/// Mean-field trajectory of the closed moment equations.
pub fn integrate_meanfield(scenario: &ScenarioConfig) -> Result<TrajectoryResult> {
    scenario.validate()?;
    let sizes = scenario.ensemble_sizes();
    let n = sizes.len();
    let tape = generate_moment_system(scenario)?.compile(&sizes, scenario.time_scale())?;

    let mut y0 = initial_moments(scenario)?;
    normalize(&mut y0, &sizes, false);
    let grid = scenario.tau_grid();
    let mut obs = MeanfieldObserver {
        sizes: &sizes,
        tau: Vec::with_capacity(grid.len()),
        energies: vec![Vec::with_capacity(grid.len()); n],
        moments: Vec::with_capacity(grid.len()),
    };
    let mut values = Vec::new();
    Dopri5::new(scenario.rtol, scenario.atol).integrate(
        |_, y: &[f64], dy: &mut [f64]| tape.evaluate(y, dy, &mut values),
        &y0.to_flat(),
        &grid,
        &mut obs,
    )?;
    Ok(TrajectoryResult {
        tau: obs.tau,
        energies: obs.energies,
        labels: scenario.ensemble_labels(),
        method: Method::Meanfield,
        scenario: scenario.clone(),
        moments: Some(obs.moments),
    })
}

/// Divides by the ensemble sizes, or multiplies when `inverse` is set.
fn normalize(st: &mut MomentState, sizes: &[usize], inverse: bool) {
    let factor = |n: f64| if inverse { n } else { 1.0 / n };
    for (z, &n) in st.z.iter_mut().zip(sizes) {
        *z *= factor(n as f64);
    }
    for a in 0..sizes.len() {
        for b in a..sizes.len() {
            let k = factor((sizes[a] * sizes[b]) as f64);
            st.set_s(a, b, st.s(a, b) * k);
        }
    }
}

/// Exact trajectory from the full master equation.
pub fn integrate_exact(scenario: &ScenarioConfig) -> Result<TrajectoryResult> {
    scenario.validate()?;
    let sizes = scenario.ensemble_sizes();
    check_capacity(joint_dimension(&sizes))?;

    let dims: Vec<usize> = sizes.iter().map(|n| n + 1).collect();
    let basis = ProductBasis::new(dims.clone());
    let local: Vec<usize> = sizes
        .iter()
        .zip(&scenario.initial_levels)
        .map(|(&n, l)| match l {
            Level::Excited => 0,
            Level::Ground => n,
        })
        .collect();
    let layout = LiouvilleLayout::block_diagonal(&dims);
    let rho0 = layout.basis_state(basis.flatten(&local));
    let channels = build_channels(scenario)?;
    let options = ExactOptions {
        rtol: scenario.rtol,
        atol: scenario.atol,
        time_scale: scenario.time_scale(),
    };
    let grid = scenario.tau_grid();
    let mut tau = Vec::with_capacity(grid.len());
    let mut energies = vec![Vec::with_capacity(grid.len()); sizes.len()];
    evolve_exact_with(layout, rho0, &channels, &grid, &options, |t, state| {
        tau.push(t);
        for (a, jz) in state.jz_expectations().into_iter().enumerate() {
            let e = jz / sizes[a] as f64 + 0.5;
            energies[a].push(clamp_energy(e, a, t, ENERGY_SLACK)?);
        }
        Ok(())
    })?;
    Ok(TrajectoryResult {
        tau,
        energies,
        labels: scenario.ensemble_labels(),
        method: Method::Exact,
        scenario: scenario.clone(),
        moments: None,
    })
}

/// Mean of `E_ensemble` over the last `window` fraction of the run, provided
/// its spread there is below `tol`.
pub fn steady_state_value(
    traj: &TrajectoryResult,
    ensemble: usize,
    window: f64,
    tol: f64,
) -> Result<f64> {
    traj.check_ensemble(ensemble)?;
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::invalid("window", "must lie in (0, 1]"));
    }
    let t_end = *traj.tau.last().unwrap();
    let t_start = traj.tau[0] + (1.0 - window) * (t_end - traj.tau[0]);
    let tail: Vec<f64> = traj
        .tau
        .iter()
        .zip(&traj.energies[ensemble])
        .filter(|(t, _)| **t >= t_start)
        .map(|(_, e)| *e)
        .collect();
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    // NaN spreads count as not converged
    if spread.is_nan() || spread >= tol {
        return Err(Error::NotConverged {
            ensemble,
            spread,
            tol,
        });
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// First scaled time at which `E_ensemble` reaches `threshold` times its
/// steady value, interpolated linearly between grid points.
pub fn charging_time(traj: &TrajectoryResult, ensemble: usize, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("threshold", "must lie in (0, 1)"));
    }
    let steady = steady_state_value(traj, ensemble, DEFAULT_STEADY_WINDOW, DEFAULT_STEADY_TOL)?;
    let target = threshold * steady;
    let e = &traj.energies[ensemble];
    if e[0] >= target {
        return Ok(traj.tau[0]);
    }
    for k in 1..e.len() {
        if e[k] >= target {
            let frac = (target - e[k - 1]) / (e[k] - e[k - 1]);
            return Ok(traj.tau[k - 1] + frac * (traj.tau[k] - traj.tau[k - 1]));
        }
    }
    Err(Error::NotReached { ensemble, target })
}

/// Integrates, doubling `tau_max` until every ensemble is steady.
pub fn run_to_steady(scenario: &ScenarioConfig, method: Method) -> Result<TrajectoryResult> {
    let (traj, unsettled) = extend_until_steady(scenario, method)?;
    match unsettled {
        None => Ok(traj),
        Some(err) => Err(err),
    }
}

/// Like [`run_to_steady`] but hands back the longest run even when it never
/// settled, together with the convergence error.
pub fn extend_until_steady(
    scenario: &ScenarioConfig,
    method: Method,
) -> Result<(TrajectoryResult, Option<Error>)> {
    let mut sc = scenario.clone();
    let mut attempt = 0;
    loop {
        let traj = integrate(&sc, method)?;
        let unsettled = (0..traj.n_ensembles())
            .map(|a| steady_state_value(&traj, a, DEFAULT_STEADY_WINDOW, DEFAULT_STEADY_TOL))
            .find_map(|r| r.err());
        if unsettled.is_none() || attempt >= MAX_EXTENSIONS {
            return Ok((traj, unsettled));
        }
        attempt += 1;
        sc.tau_max *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(series: Vec<f64>) -> TrajectoryResult {
        let tau = (0..series.len()).map(|k| k as f64).collect();
        TrajectoryResult {
            tau,
            energies: vec![series],
            labels: vec!["C".into()],
            method: Method::Meanfield,
            scenario: ScenarioConfig::new(1, vec![1], 1.0, 0.0),
            moments: None,
        }
    }

    #[test]
    fn constant_series_is_steady() {
        let t = synthetic(vec![0.3; 20]);
        assert!((steady_state_value(&t, 0, 0.2, 1e-3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn drifting_series_not_converged() {
        let t = synthetic((0..20).map(|k| k as f64 * 0.01).collect());
        assert!(matches!(
            steady_state_value(&t, 0, 0.2, 1e-3),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn step_charging_time() {
        let mut s = vec![0.0; 5];
        s.extend(vec![1.0; 15]);
        let t = synthetic(s);
        let tc = charging_time(&t, 0, 0.9).unwrap();
        assert!(tc <= 5.0 && tc > 4.0);
        assert!((tc - 4.9).abs() < 1e-12);
    }

    #[test]
    fn bad_threshold() {
        let t = synthetic(vec![1.0; 5]);
        assert!(charging_time(&t, 0, 1.0).is_err());
        assert!(steady_state_value(&t, 3, 0.2, 1e-3).is_err());
    }

    #[test]
    fn dark_initial_state_stays_dark() {
        let mut sc = ScenarioConfig::new(50, vec![5, 5], 1.0, 0.0);
        sc.initial_levels = vec![Level::Ground; 3];
        sc.tau_max = 5.0;
        let traj = integrate_meanfield(&sc).unwrap();
        for s in &traj.energies {
            assert!(s.iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn method_parse() {
        assert_eq!("exact".parse::<Method>().unwrap(), Method::Exact);
        assert!("foo".parse::<Method>().is_err());
    }
}
