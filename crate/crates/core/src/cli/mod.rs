// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O error, 2 invalid configuration or arguments,
//! 3 integration or steady-state failure, 4 exact-solver capacity exceeded.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dynamics::{extend_until_steady, integrate, Method};
use crate::error::{Error, Result};
use crate::moments::generate_moment_system;
use config::ScenarioFile;
use figures::{Panel, PANELS};
use output::{trajectory_csv, trajectory_svg};
use sweep::{parse_values, run_sweep, sweep_csv, SweepParam};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument { .. } | Error::Config(_) => EXIT_CONFIG,
        Error::IntegrationFailure { .. }
        | Error::NotConverged { .. }
        | Error::NotReached { .. }
        | Error::UnsupportedClosure { .. } => EXIT_INTEGRATION,
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Io(_) => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qbcharge",
    version,
    about = "Collective charging of spin-ensemble batteries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Overrides {
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long = "tau-max")]
    pub tau_max: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one scenario file and write its trajectory as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Reproduce a figure panel: writes panel_<x>.csv and panel_<x>.svg.
    Figure {
        /// a, b, c, d, e, f, inset or all
        #[arg(long)]
        panel: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Steady-state summary over a list of parameter values.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values
        #[arg(long)]
        values: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the generated mean-field equations for a scenario.
    Equations {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(path: &Path, ov: &Overrides) -> Result<(crate::ScenarioConfig, Method)> {
    let mut file = ScenarioFile::load(path)?;
    if let Some(m) = ov.method {
        file.method = m;
    }
    if let Some(v) = ov.rtol {
        file.rtol = v;
    }
    if let Some(v) = ov.atol {
        file.atol = v;
    }
    if let Some(v) = ov.tau_max {
        file.tau_max = v;
    }
    let sc = file.scenario()?;
    Ok((sc, file.method))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Runs one parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            overrides,
        } => {
            let (sc, method) = load(&config, &overrides)?;
            // an explicit horizon is honoured as given
            let traj = if overrides.tau_max.is_some() {
                integrate(&sc, method)?
            } else {
                let (traj, unsettled) = extend_until_steady(&sc, method)?;
                if let Some(e) = unsettled {
                    eprintln!("warning: {e}");
                }
                traj
            };
            write(&out, &trajectory_csv(&traj))
        }
        Command::Figure { panel, out } => {
            let panels: Vec<Panel> = if panel == "all" {
                PANELS.to_vec()
            } else {
                vec![Panel::by_name(&panel).ok_or_else(|| {
                    Error::invalid(
                        "panel",
                        format!("unknown panel `{panel}` (a-f, inset, all)"),
                    )
                })?]
            };
            for p in panels {
                let traj = integrate(&p.scenario(), Method::Meanfield)?;
                write(
                    &out.join(format!("panel_{}.csv", p.name)),
                    &trajectory_csv(&traj),
                )?;
                write(
                    &out.join(format!("panel_{}.svg", p.name)),
                    &trajectory_svg(&traj, &p.title()),
                )?;
            }
            Ok(())
        }
        Command::Sweep {
            param,
            values,
            config,
            out,
            jobs,
            overrides,
        } => {
            let (base, method) = load(&config, &overrides)?;
            let values = parse_values(&values)?;
            let jobs = match jobs {
                Some(0) => return Err(Error::invalid("jobs", "must be at least 1")),
                Some(j) => j,
                None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            };
            let rows = run_sweep(param, &values, &base, method, jobs)?;
            write(&out, &sweep_csv(param, &rows, &base))?;
            let failed: Vec<&String> = rows
                .iter()
                .filter_map(|r| r.outcome.as_ref().err())
                .collect();
            for msg in &failed {
                eprintln!("warning: {msg}");
            }
            if failed.len() == rows.len() {
                return Err(Error::IntegrationFailure {
                    tau: 0.0,
                    reason: "every sweep row failed".into(),
                });
            }
            Ok(())
        }
        Command::Equations { config } => {
            let (sc, _) = load(
                &config,
                &Overrides {
                    method: None,
                    rtol: None,
                    atol: None,
                    tau_max: None,
                },
            )?;
            print!("{}", generate_moment_system(&sc)?.dump());
            Ok(())
        }
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
