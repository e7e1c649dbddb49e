// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::output::format_g9;
use crate::dynamics::{
    charging_time, run_to_steady, steady_state_value, Method, DEFAULT_CHARGING_THRESHOLD,
    DEFAULT_STEADY_TOL, DEFAULT_STEADY_WINDOW,
};
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum SweepParam {
    GammaUp,
    NCharger,
    Nbar,
    MReservoirs,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::GammaUp => "gamma_up",
            SweepParam::NCharger => "n_charger",
            SweepParam::Nbar => "nbar",
            SweepParam::MReservoirs => "m_reservoirs",
        })
    }
}

impl SweepParam {
    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut sc = base.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(
                    self.to_string(),
                    format!("{v} is not a count"),
                ))
            }
        };
        match self {
            SweepParam::GammaUp => sc.gamma_up = value,
            SweepParam::Nbar => sc.nbar = value,
            SweepParam::NCharger => sc.n_charger = count(value)?,
            SweepParam::MReservoirs => sc = sc.with_reservoirs(count(value)?),
        }
        sc.validate()?;
        Ok(sc)
    }
}

pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| {
            f64::from_str(v.trim())
                .map_err(|_| Error::invalid("values", format!("`{}` is not a number", v.trim())))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::invalid("values", "need at least one value"));
    }
    Ok(values)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<(Vec<f64>, Option<f64>), String>,
}

fn evaluate(param: SweepParam, base: &ScenarioConfig, method: Method, value: f64) -> SweepRow {
    let outcome = (|| -> Result<(Vec<f64>, Option<f64>)> {
        let sc = param.apply(base, value)?;
        let traj = run_to_steady(&sc, method)?;
        let steady = (0..traj.n_ensembles())
            .map(|a| steady_state_value(&traj, a, DEFAULT_STEADY_WINDOW, DEFAULT_STEADY_TOL))
            .collect::<Result<Vec<_>>>()?;
        let tau = charging_time(&traj, 1, DEFAULT_CHARGING_THRESHOLD).ok();
        Ok((steady, tau))
    })();
    SweepRow {
        value,
        outcome: outcome.map_err(|e| e.to_string()),
    }
}

/// Rows in input order; `jobs` worker threads.
pub fn run_sweep(
    param: SweepParam,
    values: &[f64],
    base: &ScenarioConfig,
    method: Method,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    Ok(pool.install(|| {
        values
            .par_iter()
            .map(|&v| evaluate(param, base, method, v))
            .collect()
    }))
}

/// Summary CSV: parameter, steady energies, charging time of `B1`, error.
pub fn sweep_csv(param: SweepParam, rows: &[SweepRow], base: &ScenarioConfig) -> String {
    let n_batteries = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|(e, _)| e.len() - 1))
        .chain(std::iter::once(base.n_batteries()))
        .max()
        .unwrap_or(1);
    let mut out = format!("{param},E_C");
    for m in 1..=n_batteries {
        out.push_str(&format!(",E_B{m}"));
    }
    out.push_str(",charging_tau,error\n");
    for row in rows {
        out.push_str(&format_g9(row.value));
        match &row.outcome {
            Ok((steady, tau)) => {
                for a in 0..=n_batteries {
                    out.push(',');
                    out.push_str(&steady.get(a).map_or("NA".into(), |e| format_g9(*e)));
                }
                out.push(',');
                out.push_str(&tau.map_or("NA".into(), format_g9));
                out.push_str(",\n");
            }
            Err(msg) => {
                for _ in 0..=n_batteries + 1 {
                    out.push_str(",NA");
                }
                out.push(',');
                out.push_str(&csv_field(msg));
                out.push('\n');
            }
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}
