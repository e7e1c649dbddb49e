// SPDX-License-Identifier: Apache-2.0

//! Block-sparse Liouville representation and the Lindblad generator acting on it.
//!
//! Joint basis states are grouped by their de-excitation level
//! `L = sum_mu (j_mu - m_mu)`; level 0 is the fully excited state. A density
//! matrix is stored as dense blocks `rho[a][b]` between levels `a` and `b`, and
//! only blocks whose coherence order `a - b` appears in the initial state are
//! kept (the generator preserves the coherence order). For the protocol's
//! product initial states that leaves the block-diagonal part alone.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{check_capacity, DensityMatrix, LindbladChannel, POSITIVITY_ABORT};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, Observer, OdeStats};
use crate::spin_algebra::{ProductBasis, SpinRepresentation};

/// Real sparse matrix in coordinate form.
#[derive(Debug, Clone, Default)]
struct SparseBlock {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseBlock {
    fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != 0.0 {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    #[cfg(test)]
    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `y += scale * S x` with `x` (cols x ncols) and `y` (rows x ncols), column-major.
    fn left_mul_acc(&self, x: &[Complex64], y: &mut [Complex64], ncols: usize, scale: f64) {
        for &(r, c, v) in &self.entries {
            let w = v * scale;
            for col in 0..ncols {
                y[r + col * self.rows] += x[c + col * self.cols] * w;
            }
        }
    }

    /// `y += scale * x S^T` with `x` (nrows x cols) and `y` (nrows x rows).
    fn right_mul_transpose_acc(
        &self,
        x: &[Complex64],
        y: &mut [Complex64],
        nrows: usize,
        scale: f64,
    ) {
        for &(r, c, v) in &self.entries {
            let w = v * scale;
            let (dst, src) = (r * nrows, c * nrows);
            for i in 0..nrows {
                y[dst + i] += x[src + i] * w;
            }
        }
    }
}

/// Joint basis grouped by de-excitation level.
#[derive(Debug, Clone)]
struct LevelStructure {
    basis: ProductBasis,
    members: Vec<Vec<usize>>,
    level_of: Vec<usize>,
    position: Vec<usize>,
}

impl LevelStructure {
    fn new(dims: &[usize]) -> Self {
        let basis = ProductBasis::new(dims.to_vec());
        let max_level: usize = dims.iter().map(|d| d - 1).sum();
        let mut members = vec![Vec::new(); max_level + 1];
        let mut level_of = vec![0; basis.len()];
        let mut position = vec![0; basis.len()];
        for joint in 0..basis.len() {
            let l: usize = (0..dims.len()).map(|s| basis.local(joint, s)).sum();
            level_of[joint] = l;
            position[joint] = members[l].len();
            members[l].push(joint);
        }
        Self {
            basis,
            members,
            level_of,
            position,
        }
    }

    fn n_levels(&self) -> usize {
        self.members.len()
    }

    fn size(&self, level: usize) -> usize {
        self.members[level].len()
    }
}

/// Which `(a, b)` level blocks are stored, and where.
#[derive(Debug, Clone)]
pub struct LiouvilleLayout {
    levels: LevelStructure,
    orders: Vec<isize>,
    blocks: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    index: Vec<Option<usize>>,
    len: usize,
}

impl LiouvilleLayout {
    fn with_orders(dims: &[usize], orders: BTreeSet<isize>) -> Self {
        let levels = LevelStructure::new(dims);
        let nl = levels.n_levels();
        let mut blocks = Vec::new();
        let mut offsets = Vec::new();
        let mut index = vec![None; nl * nl];
        let mut len = 0;
        for a in 0..nl {
            for b in 0..nl {
                if orders.contains(&(a as isize - b as isize)) {
                    index[a * nl + b] = Some(blocks.len());
                    blocks.push((a, b));
                    offsets.push(len);
                    len += levels.size(a) * levels.size(b);
                }
            }
        }
        Self {
            levels,
            orders: orders.into_iter().collect(),
            blocks,
            offsets,
            index,
            len,
        }
    }

    /// Layout holding only populations and same-level coherences.
    pub fn block_diagonal(dims: &[usize]) -> Self {
        Self::with_orders(dims, BTreeSet::from([0]))
    }

    /// Layout holding every coherence order present in `rho`.
    pub fn covering(rho: &DensityMatrix) -> Self {
        let levels = LevelStructure::new(rho.ensemble_dims());
        let m = rho.matrix();
        let mut orders = BTreeSet::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    orders.insert(levels.level_of[i] as isize - levels.level_of[j] as isize);
                }
            }
        }
        orders.insert(0);
        Self::with_orders(rho.ensemble_dims(), orders)
    }

    /// Every block, i.e. an arbitrary density matrix.
    pub fn full(dims: &[usize]) -> Self {
        let max: isize = dims.iter().map(|d| *d as isize - 1).sum();
        Self::with_orders(dims, (-max..=max).collect())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> &[usize] {
        self.levels.basis.dims()
    }

    pub fn coherence_orders(&self) -> &[isize] {
        &self.orders
    }

    fn block(&self, a: usize, b: usize) -> Option<usize> {
        let nl = self.levels.n_levels();
        if a >= nl || b >= nl {
            return None;
        }
        self.index[a * nl + b]
    }

    /// Flat position of the matrix element `(i, j)`, when stored.
    fn locate(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.levels.level_of[i], self.levels.level_of[j]);
        let blk = self.block(a, b)?;
        let rows = self.levels.size(a);
        Some(self.offsets[blk] + self.levels.position[i] + self.levels.position[j] * rows)
    }

    pub fn pack(&self, rho: &DensityMatrix) -> Result<Vec<Complex64>> {
        if rho.ensemble_dims() != self.dims() {
            return Err(Error::invalid(
                "rho",
                "ensemble dims do not match the layout",
            ));
        }
        let m = rho.matrix();
        let mut out = vec![Complex64::new(0.0, 0.0); self.len];
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                match self.locate(i, j) {
                    Some(p) => out[p] = v,
                    None if v != Complex64::new(0.0, 0.0) => {
                        return Err(Error::invalid(
                            "rho",
                            format!("element ({i}, {j}) lies outside the stored coherence orders"),
                        ))
                    }
                    None => {}
                }
            }
        }
        Ok(out)
    }

    /// Vector of the pure basis state `|joint><joint|`.
    pub fn basis_state(&self, joint: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len];
        let p = self
            .locate(joint, joint)
            .expect("diagonal block always stored");
        out[p] = Complex64::new(1.0, 0.0);
        out
    }

    pub fn unpack(&self, data: &[Complex64]) -> DensityMatrix {
        let d = self.levels.basis.len();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (blk, &(a, b)) in self.blocks.iter().enumerate() {
            let rows = &self.levels.members[a];
            let cols = &self.levels.members[b];
            let off = self.offsets[blk];
            for (jj, &j) in cols.iter().enumerate() {
                for (ii, &i) in rows.iter().enumerate() {
                    m[(i, j)] = data[off + ii + jj * rows.len()];
                }
            }
        }
        DensityMatrix::new(m, self.dims().to_vec()).expect("layout dims are consistent")
    }
}

/// Borrowed view of a packed state.
#[derive(Debug, Clone, Copy)]
pub struct LiouvilleState<'a> {
    layout: &'a LiouvilleLayout,
    data: &'a [Complex64],
}

impl<'a> LiouvilleState<'a> {
    pub fn new(layout: &'a LiouvilleLayout, data: &'a [Complex64]) -> Self {
        Self { layout, data }
    }

    pub fn data(&self) -> &[Complex64] {
        self.data
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        self.layout.unpack(self.data)
    }

    /// Populations `rho_ii` in joint-basis order.
    pub fn populations(&self) -> Vec<f64> {
        let n = self.layout.levels.basis.len();
        (0..n)
            .map(|i| self.data[self.layout.locate(i, i).expect("diagonal stored")].re)
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// `<J_mu^z>` for every ensemble.
    pub fn jz_expectations(&self) -> Vec<f64> {
        let basis = &self.layout.levels.basis;
        let pops = self.populations();
        (0..basis.dims().len())
            .map(|slot| {
                let j = (basis.dims()[slot] - 1) as f64 / 2.0;
                pops.iter()
                    .enumerate()
                    .map(|(i, p)| p * (j - basis.local(i, slot) as f64))
                    .sum()
            })
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let lv = &self.layout.levels;
        if self.layout.orders == [0] {
            let mut worst = f64::INFINITY;
            for (blk, &(a, _)) in self.layout.blocks.iter().enumerate() {
                let n = lv.size(a);
                let off = self.layout.offsets[blk];
                let m = DMatrix::from_column_slice(n, n, &self.data[off..off + n * n]);
                let h = (&m + m.adjoint()) * Complex64::from(0.5);
                let e = SymmetricEigen::new(h).eigenvalues;
                worst = e.iter().fold(worst, |w, x| w.min(*x));
            }
            worst
        } else {
            self.to_density_matrix().min_eigenvalue()
        }
    }
}

#[derive(Debug, Clone)]
struct ChannelBlocks {
    shift: isize,
    /// `jumps[a]` maps level `a` to level `a + shift`.
    jumps: Vec<Option<SparseBlock>>,
    weight: f64,
}

/// Lindblad generator specialised to a layout, with rates divided by the
/// time scale.
#[derive(Debug, Clone)]
pub struct Generator {
    layout: LiouvilleLayout,
    channels: Vec<ChannelBlocks>,
    /// `sum_c rate_c O_c^T O_c` per level.
    decay: Vec<SparseBlock>,
    scratch_len: usize,
}

impl Generator {
    pub fn new(
        layout: LiouvilleLayout,
        channels: &[LindbladChannel],
        time_scale: f64,
    ) -> Result<Self> {
        if !time_scale.is_finite() || time_scale <= 0.0 {
            return Err(Error::invalid(
                "time_scale",
                format!("must be > 0, got {time_scale}"),
            ));
        }
        let dims = layout.dims().to_vec();
        let reps: Vec<SpinRepresentation> = dims
            .iter()
            .map(|d| SpinRepresentation::new(d - 1))
            .collect::<Result<_>>()?;
        let lv = &layout.levels;
        let nl = lv.n_levels();
        let mut decay_dense: Vec<DMatrix<f64>> = (0..nl)
            .map(|a| DMatrix::zeros(lv.size(a), lv.size(a)))
            .collect();
        let mut blocks = Vec::with_capacity(channels.len());
        for ch in channels {
            ch.check_ensembles(dims.len())?;
            let shift = ch.level_shift();
            let weight = ch.rate / time_scale;
            let mut jumps = Vec::with_capacity(nl);
            for (a, decay) in decay_dense.iter_mut().enumerate() {
                let target = a as isize + shift;
                if target < 0 || target >= nl as isize {
                    jumps.push(None);
                    continue;
                }
                let target = target as usize;
                let mut m = DMatrix::<f64>::zeros(lv.size(target), lv.size(a));
                for (col, &joint) in lv.members[a].iter().enumerate() {
                    for t in &ch.terms {
                        let local = lv.basis.local(joint, t.ensemble);
                        let stride = lv.basis.stride(t.ensemble);
                        let rep = &reps[t.ensemble];
                        let (dest, amp) = match ch.ladder() {
                            super::Ladder::Lower => (joint + stride, rep.lowering_element(local)),
                            super::Ladder::Raise => {
                                if local == 0 {
                                    continue;
                                }
                                (joint - stride, rep.lowering_element(local - 1))
                            }
                        };
                        if amp == 0.0 {
                            continue;
                        }
                        m[(lv.position[dest], col)] += t.coeff * amp;
                    }
                }
                *decay += m.transpose() * &m * weight;
                jumps.push(Some(SparseBlock::from_dense(&m)));
            }
            blocks.push(ChannelBlocks {
                shift,
                jumps,
                weight,
            });
        }
        let max_level = (0..nl).map(|a| lv.size(a)).max().unwrap_or(0);
        Ok(Self {
            decay: decay_dense.iter().map(SparseBlock::from_dense).collect(),
            channels: blocks,
            scratch_len: max_level * max_level,
            layout,
        })
    }

    pub fn layout(&self) -> &LiouvilleLayout {
        &self.layout
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }

    /// `out = L(rho)` on packed vectors.
    pub fn apply(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let layout = &self.layout;
        let lv = &layout.levels;
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (blk, &(a, b)) in layout.blocks.iter().enumerate() {
            let (na, nb) = (lv.size(a), lv.size(b));
            let off = layout.offsets[blk];
            let src = &rho[off..off + na * nb];
            let dst = &mut out[off..off + na * nb];
            // -K_a rho_ab - rho_ab K_b, K symmetric
            self.decay[a].left_mul_acc(src, dst, nb, -1.0);
            self.decay[b].right_mul_transpose_acc(src, dst, na, -1.0);

            for ch in &self.channels {
                let (sa, sb) = (a as isize - ch.shift, b as isize - ch.shift);
                if sa < 0 || sb < 0 {
                    continue;
                }
                let (sa, sb) = (sa as usize, sb as usize);
                let Some(sblk) = layout.block(sa, sb) else {
                    continue;
                };
                let (Some(ja), Some(jb)) = (&ch.jumps[sa], &ch.jumps[sb]) else {
                    continue;
                };
                let nsb = lv.size(sb);
                let soff = layout.offsets[sblk];
                let s_src = &rho[soff..soff + lv.size(sa) * nsb];
                let tmp = &mut scratch[..na * nsb];
                tmp.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                ja.left_mul_acc(s_src, tmp, nsb, 1.0);
                jb.right_mul_transpose_acc(tmp, dst, na, 2.0 * ch.weight);
            }
        }
    }

    /// Dense `sum_c w_c O_c^T O_c` on level `a`, for tests.
    #[cfg(test)]
    fn decay_block(&self, a: usize) -> DMatrix<f64> {
        self.decay[a].to_dense()
    }
}

/// `d rho / dt` for a dense state, through the block generator.
pub fn apply_generator(rho: &DensityMatrix, channels: &[LindbladChannel]) -> Result<DensityMatrix> {
    check_capacity(rho.dim())?;
    let layout = LiouvilleLayout::full(rho.ensemble_dims());
    let packed = layout.pack(rho)?;
    let gen = Generator::new(layout, channels, 1.0)?;
    let mut out = vec![Complex64::new(0.0, 0.0); packed.len()];
    let mut scratch = gen.scratch();
    gen.apply(&packed, &mut out, &mut scratch);
    Ok(gen.layout().unpack(&out))
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Rates are divided by this; `tau = time_scale * t`.
    pub time_scale: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            rtol: crate::scenario::DEFAULT_RTOL,
            atol: crate::scenario::DEFAULT_ATOL,
            time_scale: 1.0,
        }
    }
}

struct Forward<'g, F> {
    layout: &'g LiouvilleLayout,
    sink: F,
}

impl<F> Observer<Complex64> for Forward<'_, F>
where
    F: FnMut(f64, LiouvilleState<'_>) -> Result<()>,
{
    fn output(&mut self, _index: usize, t: f64, y: &[Complex64]) -> Result<()> {
        let state = LiouvilleState::new(self.layout, y);
        let min = state.min_eigenvalue();
        if min < -POSITIVITY_ABORT {
            return Err(Error::IntegrationFailure {
                tau: t,
                reason: format!(
                    "positivity violated: minimum eigenvalue {min:.3e} below -{POSITIVITY_ABORT:.0e}; tighten rtol/atol"
                ),
            });
        }
        (self.sink)(t, state)
    }
}

/// Integrates a packed state, handing every grid point to `sink`.
pub fn evolve_exact_with<F>(
    layout: LiouvilleLayout,
    rho0: Vec<Complex64>,
    channels: &[LindbladChannel],
    tau_grid: &[f64],
    options: &ExactOptions,
    sink: F,
) -> Result<OdeStats>
where
    F: FnMut(f64, LiouvilleState<'_>) -> Result<()>,
{
    check_capacity(layout.levels.basis.len())?;
    if rho0.len() != layout.len() {
        return Err(Error::invalid(
            "rho0",
            "packed length does not match layout",
        ));
    }
    if tau_grid.first() != Some(&0.0) {
        return Err(Error::invalid("tau_grid", "must start at 0"));
    }
    let gen = Generator::new(layout, channels, options.time_scale)?;
    let mut scratch = gen.scratch();
    let mut forward = Forward {
        layout: gen.layout(),
        sink,
    };
    Dopri5::new(options.rtol, options.atol).integrate(
        |_, y: &[Complex64], dy: &mut [Complex64]| gen.apply(y, dy, &mut scratch),
        &rho0,
        tau_grid,
        &mut forward,
    )
}

/// `rho(tau_k)` for every point of `tau_grid`.
pub fn evolve_exact(
    rho0: &DensityMatrix,
    channels: &[LindbladChannel],
    tau_grid: &[f64],
    options: &ExactOptions,
) -> Result<Vec<DensityMatrix>> {
    check_capacity(rho0.dim())?;
    let layout = LiouvilleLayout::covering(rho0);
    let packed = layout.pack(rho0)?;
    let mut out = Vec::with_capacity(tau_grid.len());
    evolve_exact_with(layout, packed, channels, tau_grid, options, |_, s| {
        out.push(s.to_density_matrix());
        Ok(())
    })?;
    Ok(out)
}
