// SPDX-License-Identifier: Apache-2.0

//! Simulator for a collective-spin charger that charges `M` spin-ensemble
//! batteries, each sitting in its own zero-temperature reservoir, with an
//! optional incoherent collective pump on the charger.
//!
//! Two solvers share one scenario description and one trajectory type:
//!
//! * [`exact`] integrates the full Lindblad master equation on the product of
//!   the ensembles' maximal-spin sectors. Practical up to a joint dimension of
//!   a few thousand.
//! * [`moments`] derives closed mean-field equations for `<J^z>` and
//!   `<J^+ J^->` symbolically (su(2) normal ordering plus a second-order
//!   cumulant closure), which [`dynamics`] integrates at any ensemble size.
//!
//! All time is measured in the superradiant scaled time `tau = N_C * gamma_down * t`.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod moments;
pub mod ode;
pub mod scenario;
pub mod spin_algebra;

pub use dynamics::{
    charging_time, integrate, integrate_exact, integrate_meanfield, run_to_steady,
    steady_state_value, Method, MomentState, TrajectoryResult,
};
pub use error::{Error, Result};
pub use exact::{DensityMatrix, LindbladChannel};
pub use scenario::{Level, ScenarioConfig};
pub use spin_algebra::SpinRepresentation;
