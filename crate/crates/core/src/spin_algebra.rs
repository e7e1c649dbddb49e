// SPDX-License-Identifier: Apache-2.0

//! Collective spin operators of one ensemble and their embedding into the
//! multi-ensemble product space.
//!
//! An ensemble of `N` spin-1/2 particles prepared fully excited or fully
//! ground lives in the symmetric sector `j = N/2`, of dimension `N + 1`. The
//! basis is `|j, m>` with `m` descending: index 0 is `m = +j` (fully excited),
//! index `N` is `m = -j` (ground).
//!
//! Keeping only this sector is exact for every generator used in this crate.
//! Each jump operator is a linear combination of per-ensemble collective
//! operators `J_mu^+-`, all of which commute with each ensemble's Casimir
//! `J_mu . J_mu`. The Casimir eigenvalue `j(j+1)` of each ensemble is therefore
//! conserved, and a state starting in the maximal-`j` sector never leaves it.

use nalgebra::{ClosedAddAssign, ClosedMulAssign, DMatrix, Scalar};
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::DensityMatrix;
use crate::scenario::Level;

/// Symmetric (maximal-`j`) sector of one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinRepresentation {
    n_spins: usize,
}

impl SpinRepresentation {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::invalid("n_spins", "must be at least 1"));
        }
        Ok(Self { n_spins })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Total spin `j = N/2`.
    pub fn j(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n_spins + 1
    }

    /// Magnetic quantum number of basis index `idx`.
    pub fn m(&self, idx: usize) -> f64 {
        self.j() - idx as f64
    }

    /// `<j, m-1| J^- |j, m>` for the basis state at `idx` (zero at the bottom).
    pub fn lowering_element(&self, idx: usize) -> f64 {
        if idx >= self.n_spins {
            return 0.0;
        }
        let (j, m) = (self.j(), self.m(idx));
        (j * (j + 1.0) - m * (m - 1.0)).sqrt()
    }

    /// Basis index of the requested level: 0 when excited, `N` when ground.
    pub fn level_index(&self, level: Level) -> usize {
        match level {
            Level::Excited => 0,
            Level::Ground => self.n_spins,
        }
    }

    pub fn operators(&self) -> CollectiveOperators {
        let d = self.dim();
        let mut minus = DMatrix::zeros(d, d);
        for idx in 0..self.n_spins {
            minus[(idx + 1, idx)] = self.lowering_element(idx);
        }
        let plus = minus.transpose();
        let z = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |i, _| self.m(i)));
        CollectiveOperators { plus, minus, z }
    }
}

/// `J^+`, `J^-`, `J^z` of one ensemble as dense real matrices.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub plus: DMatrix<f64>,
    pub minus: DMatrix<f64>,
    pub z: DMatrix<f64>,
}

impl CollectiveOperators {
    /// `J^+ J^- + (J^z)^2 - J^z`, which equals `j(j+1)` times the identity.
    pub fn casimir(&self) -> DMatrix<f64> {
        &self.plus * &self.minus + &self.z * &self.z - &self.z
    }
}

pub fn collective_operators(n_spins: usize) -> Result<CollectiveOperators> {
    Ok(SpinRepresentation::new(n_spins)?.operators())
}

/// Kronecker product `I ⊗ .. ⊗ op ⊗ .. ⊗ I` with `op` in position `slot`.
pub fn embed<T>(op: &DMatrix<T>, slot: usize, dims: &[usize]) -> Result<DMatrix<T>>
where
    T: Scalar + Zero + One + Copy + ClosedAddAssign + ClosedMulAssign,
{
    if slot >= dims.len() {
        return Err(Error::invalid(
            "slot",
            format!("slot {slot} out of range for {} ensembles", dims.len()),
        ));
    }
    if op.nrows() != dims[slot] || op.ncols() != dims[slot] {
        return Err(Error::invalid(
            "op",
            format!(
                "operator is {}x{} but ensemble {slot} has dimension {}",
                op.nrows(),
                op.ncols(),
                dims[slot]
            ),
        ));
    }
    let mut out = DMatrix::<T>::identity(1, 1);
    for (k, &d) in dims.iter().enumerate() {
        out = if k == slot {
            out.kronecker(op)
        } else {
            out.kronecker(&DMatrix::<T>::identity(d, d))
        };
    }
    Ok(out)
}

/// Pure product state with each ensemble fully excited or fully ground.
pub fn initial_state(reps: &[SpinRepresentation], levels: &[Level]) -> Result<DensityMatrix> {
    if reps.is_empty() {
        return Err(Error::invalid("levels", "need at least one ensemble"));
    }
    if reps.len() != levels.len() {
        return Err(Error::invalid(
            "levels",
            format!("{} levels given for {} ensembles", levels.len(), reps.len()),
        ));
    }
    let dims: Vec<usize> = reps.iter().map(|r| r.dim()).collect();
    let indices: Vec<usize> = reps
        .iter()
        .zip(levels)
        .map(|(r, &l)| r.level_index(l))
        .collect();
    let joint = ProductBasis::new(dims.clone()).flatten(&indices);
    let d: usize = dims.iter().product();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    m[(joint, joint)] = Complex64::new(1.0, 0.0);
    DensityMatrix::new(m, dims)
}

/// Row-major mixed-radix index map of the product basis; ensemble 0 is the
/// most significant digit, matching [`embed`]'s Kronecker order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductBasis {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl ProductBasis {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Self { dims, strides }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self, local: &[usize]) -> usize {
        local.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn local(&self, joint: usize, slot: usize) -> usize {
        (joint / self.strides[slot]) % self.dims[slot]
    }

    pub fn stride(&self, slot: usize) -> usize {
        self.strides[slot]
    }
}
