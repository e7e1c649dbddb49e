// SPDX-License-Identifier: Apache-2.0

//! Exact Lindblad dynamics on the product of the ensembles' symmetric sectors.
//!
//! Every dissipator has the form `rate * (2 O rho O^† - O^†O rho - rho O^†O)`,
//! with the explicit factor 2. Jump operators are sums of collective raising
//! or lowering operators, so each one shifts the joint excitation number by
//! exactly one. The generator therefore maps the block of `rho` between
//! excitation levels `(a, b)` onto `(a ± 1, b ± 1)` and keeps the coherence
//! order `a - b` fixed. [`liouville`] stores only the blocks whose coherence
//! orders occur in the initial state and applies the generator block by block
//! with sparse jump matrices; the `D^2 x D^2` superoperator is never formed.

mod channels;
mod density;
pub mod liouville;
mod observables;

pub use channels::{build_channels, JumpTerm, Ladder, LindbladChannel};
pub use density::DensityMatrix;
pub use liouville::{
    apply_generator, evolve_exact, evolve_exact_with, ExactOptions, LiouvilleLayout, LiouvilleState,
};
pub use observables::{energy_densities, logarithmic_negativity, partial_transpose};

/// Largest joint dimension accepted by the exact solver.
pub const MAX_EXACT_DIM: usize = 4096;

/// Positivity drift that aborts an exact trajectory.
pub const POSITIVITY_ABORT: f64 = 1e-6;

pub(crate) fn check_capacity(dim: usize) -> crate::Result<()> {
    if dim > MAX_EXACT_DIM {
        return Err(crate::Error::Capacity {
            dim,
            limit: MAX_EXACT_DIM,
        });
    }
    Ok(())
}

/// Joint dimension `prod (N_mu + 1)`, saturating so oversized requests still
/// trip the capacity guard instead of overflowing.
pub fn joint_dimension(sizes: &[usize]) -> usize {
    sizes
        .iter()
        .fold(1usize, |acc, n| acc.saturating_mul(n.saturating_add(1)))
}
