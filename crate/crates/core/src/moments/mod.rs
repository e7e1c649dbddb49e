// SPDX-License-Identifier: Apache-2.0

//! Mean-field equations derived symbolically from the channel list.
//!
//! For every observable `A` in `{J_mu^z} ∪ {J_mu^+ J_nu^-}` the adjoint
//! generator `sum rate (2 O^† A O - O^†O A - A O^†O)` is expanded and brought
//! to the canonical order `(J^+)^a (J^z)^b (J^-)^c` per ensemble
//! ([`normal_order`]). Expectation values are then closed at second order
//! ([`cumulant_close`]):
//!
//! * `<J_a^+ J_b^z J_c^->  ->  z_b s_ac`
//! * `<J_a^z J_b^z>        ->  z_a z_b`
//! * monomials with unequal numbers of raising and lowering factors vanish,
//!   because the dynamics conserve the excitation-number phase symmetry and
//!   the initial states are diagonal.
//!
//! The result is compiled into a flat evaluation tape ([`MomentSystem`]).
//! This closure is the standard one for superradiant ensembles and is most
//! accurate for large `N`; at tens of spins it overshoots the ground level by
//! up to one spin quantum.

mod closure;
mod operator;
mod system;

pub use closure::{cumulant_close, Moment, MomentExpr};
pub use operator::{
    adjoint_rhs, channel_operator, normal_order, Exponents, Letter, OperatorMonomial,
    OperatorPolynomial, OperatorWord, SpinOp,
};
pub use system::{generate_moment_system, initial_moments, MomentState, MomentSystem, Variable};
