// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense joint state over the product of symmetric sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    /// Wraps a matrix without checking the state invariants; see [`Self::validate`].
    pub fn new(data: DMatrix<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invalid(
                "dims",
                "need at least one nonzero ensemble dimension",
            ));
        }
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::invalid(
                "rho",
                format!(
                    "matrix is {}x{} but ensemble dims {:?} give {d}",
                    data.nrows(),
                    data.ncols(),
                    dims
                ),
            ));
        }
        Ok(Self { data, dims })
    }

    pub fn from_pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm_squared();
        Self::new(&v * v.adjoint() / Complex64::from(norm), dims)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn ensemble_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.data + self.data.adjoint()) * Complex64::from(0.5);
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(rho A)` for a dense operator on the joint space.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.data[(i, k)] * op[(k, i)];
            }
        }
        acc
    }

    pub fn expectation_real(&self, op: &DMatrix<f64>) -> Complex64 {
        self.expectation(&op.map(Complex64::from))
    }

    /// Checks trace, Hermiticity and positivity at their stated tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::from(1.0)).norm() > Self::TRACE_TOL {
            return Err(Error::invalid("rho", format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::invalid(
                "rho",
                format!("not Hermitian (error {herm:.3e})"),
            ));
        }
        let min = self.min_eigenvalue();
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::invalid(
                "rho",
                format!("negative eigenvalue {min:.3e}"),
            ));
        }
        Ok(())
    }
}
