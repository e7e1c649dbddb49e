// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{check_capacity, DensityMatrix};
use crate::error::{Error, Result};
use crate::spin_algebra::ProductBasis;

/// `<J_mu^z>/N_mu + 1/2` for every ensemble.
pub fn energy_densities(rho: &DensityMatrix) -> Vec<f64> {
    let basis = ProductBasis::new(rho.ensemble_dims().to_vec());
    let m = rho.matrix();
    basis
        .dims()
        .iter()
        .enumerate()
        .map(|(slot, &d)| {
            let n = (d - 1) as f64;
            let jz: f64 = (0..basis.len())
                .map(|i| m[(i, i)].re * (n / 2.0 - basis.local(i, slot) as f64))
                .sum();
            jz / n + 0.5
        })
        .collect()
}

/// Transposes the tensor factors listed in `partition`.
pub fn partial_transpose(rho: &DensityMatrix, partition: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.ensemble_dims().to_vec();
    if let Some(&bad) = partition.iter().find(|&&s| s >= dims.len()) {
        return Err(Error::invalid(
            "partition",
            format!("ensemble {bad} out of range for {} ensembles", dims.len()),
        ));
    }
    let basis = ProductBasis::new(dims.clone());
    let d = basis.len();
    let m = rho.matrix();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let (mut ii, mut jj) = (i, j);
            for &s in partition {
                let (li, lj) = (basis.local(i, s), basis.local(j, s));
                let stride = basis.stride(s);
                ii = ii - li * stride + lj * stride;
                jj = jj - lj * stride + li * stride;
            }
            out[(ii, jj)] = m[(i, j)];
        }
    }
    DensityMatrix::new(out, dims)
}

/// `log2 || rho^{T_partition} ||_1`.
pub fn logarithmic_negativity(rho: &DensityMatrix, partition: &[usize]) -> Result<f64> {
    check_capacity(rho.dim())?;
    let pt = partial_transpose(rho, partition)?;
    let h = (pt.matrix() + pt.matrix().adjoint()) * Complex64::from(0.5);
    let trace_norm: f64 = SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum();
    Ok(trace_norm.log2().max(0.0))
}
