// SPDX-License-Identifier: Apache-2.0

//! Test-only oracles that do not share code paths with the solvers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// `J^-` of spin `j = n/2` written straight from the ladder formula.
pub fn lowering(n: usize) -> DMatrix<Complex64> {
    let j = n as f64 / 2.0;
    DMatrix::from_fn(n + 1, n + 1, |r, col| {
        let m = j - col as f64;
        if r == col + 1 {
            c((j * (j + 1.0) - m * (m - 1.0)).sqrt())
        } else {
            c(0.0)
        }
    })
}

pub fn jz(n: usize) -> DMatrix<Complex64> {
    let j = n as f64 / 2.0;
    DMatrix::from_fn(n + 1, n + 1, |r, col| {
        if r == col {
            c(j - r as f64)
        } else {
            c(0.0)
        }
    })
}

/// Operator `op` on ensemble `slot` of a product with spin counts `sizes`.
pub fn on_slot(op: &DMatrix<Complex64>, slot: usize, sizes: &[usize]) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0));
    for (k, &n) in sizes.iter().enumerate() {
        let f = if k == slot {
            op.clone()
        } else {
            DMatrix::identity(n + 1, n + 1)
        };
        out = kron(&out, &f);
    }
    out
}

/// Dense `sum rate (2 O rho O^† - O^†O rho - rho O^†O)`.
pub fn dense_lindblad(
    rho: &DMatrix<Complex64>,
    jumps: &[(DMatrix<Complex64>, f64)],
) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    for (o, rate) in jumps {
        let od = o.adjoint();
        let k = &od * o;
        out += (o * rho * &od * c(2.0) - &k * rho - rho * &k) * c(*rate);
    }
    out
}

/// Column-stacked Liouvillian: `vec(A X B) = (B^T ⊗ A) vec(X)`.
pub fn dense_liouvillian(jumps: &[(DMatrix<Complex64>, f64)], d: usize) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(d, d);
    let mut l = DMatrix::zeros(d * d, d * d);
    for (o, rate) in jumps {
        let od = o.adjoint();
        let k = &od * o;
        l += (kron(&o.conjugate(), o) * c(2.0) - kron(&id, &k) - kron(&k.transpose(), &id))
            * c(*rate);
    }
    l
}

/// `exp(A)` by scaling and squaring with a Taylor kernel.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let norm: f64 = a.iter().map(|x| x.norm()).sum::<f64>().max(1e-300);
    let s = (norm.log2().ceil() as i32 + 4).max(0);
    let scaled = a * c(0.5f64.powi(s));
    let n = a.nrows();
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn vec_of(m: &DMatrix<Complex64>) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random density matrix diagonal in the product basis.
pub fn random_diagonal<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    let p: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
    let s: f64 = p.iter().sum();
    DMatrix::from_fn(d, d, |i, j| if i == j { c(p[i] / s) } else { c(0.0) })
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// Matrix of an unordered word over ensembles with spin counts `sizes`.
pub fn word_matrix(word: &qbcharge::moments::OperatorWord, sizes: &[usize]) -> DMatrix<Complex64> {
    use qbcharge::moments::SpinOp;
    let d: usize = sizes.iter().map(|n| n + 1).product();
    let mut m = DMatrix::identity(d, d) * word.coeff;
    for l in &word.letters {
        let n = sizes[l.ensemble];
        let local = match l.op {
            SpinOp::Plus => lowering(n).adjoint(),
            SpinOp::Z => jz(n),
            SpinOp::Minus => lowering(n),
        };
        m *= on_slot(&local, l.ensemble, sizes);
    }
    m
}

/// Random words of up to `max_len` letters on `n_ens` ensembles.
pub fn random_words<R: Rng>(
    rng: &mut R,
    n_ens: usize,
    max_terms: usize,
    max_len: usize,
) -> Vec<qbcharge::moments::OperatorWord> {
    use qbcharge::moments::{Letter, OperatorWord, SpinOp};
    let n_terms = rng.gen_range(1..=max_terms);
    (0..n_terms)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            let letters = (0..len)
                .map(|_| {
                    let op = [SpinOp::Plus, SpinOp::Z, SpinOp::Minus][rng.gen_range(0..3)];
                    Letter::new(rng.gen_range(0..n_ens), op)
                })
                .collect();
            OperatorWord::new(
                Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                letters,
            )
        })
        .collect()
}

/// Closed equations written out by hand for one charger (index 0) and `m`
/// batteries, lowering rate `gd` per reservoir and charger pump `gu`.
pub fn reference_equations(
    m: usize,
    gd: f64,
    gu: f64,
) -> Vec<(qbcharge::moments::Moment, qbcharge::moments::MomentExpr)> {
    use qbcharge::moments::{Moment, MomentExpr};
    use Moment::{S, Z};
    let n = m + 1;
    let mut eqs = Vec::new();
    for mu in 0..n {
        let mut e = MomentExpr::zero();
        for r in 1..=m {
            if mu == 0 || mu == r {
                // -gd (2 s_{mu mu} + s_{mu o} + s_{o mu}), o the partner in reservoir r
                let o = if mu == 0 { r } else { 0 };
                e.add_term(vec![S(mu, mu)], c(-2.0 * gd));
                e.add_term(vec![S(mu, o)], c(-gd));
                e.add_term(vec![S(o, mu)], c(-gd));
            }
        }
        if mu == 0 && gu > 0.0 {
            e.add_term(vec![S(0, 0)], c(2.0 * gu));
            e.add_term(vec![Z(0)], c(-4.0 * gu));
        }
        eqs.push((Z(mu), e));
    }
    for mu in 0..n {
        for nu in mu..n {
            let mut e = MomentExpr::zero();
            for r in 1..=m {
                let in_r = |k: usize| k == 0 || k == r;
                if in_r(mu) {
                    e.add_term(vec![Z(mu), S(0, nu)], c(2.0 * gd));
                    e.add_term(vec![Z(mu), S(r, nu)], c(2.0 * gd));
                }
                if in_r(nu) {
                    e.add_term(vec![Z(nu), S(mu, 0)], c(2.0 * gd));
                    e.add_term(vec![Z(nu), S(mu, r)], c(2.0 * gd));
                }
            }
            if gu > 0.0 {
                if nu == 0 {
                    e.add_term(vec![Z(0), S(mu, 0)], c(-2.0 * gu));
                    e.add_term(vec![S(mu, 0)], c(-2.0 * gu));
                }
                if mu == 0 {
                    e.add_term(vec![Z(0), S(0, nu)], c(-2.0 * gu));
                    e.add_term(vec![S(0, nu)], c(-2.0 * gu));
                }
                if mu == 0 && nu == 0 {
                    e.add_term(vec![Z(0), Z(0)], c(8.0 * gu));
                }
            }
            eqs.push((S(mu, nu), e));
        }
    }
    eqs
}
