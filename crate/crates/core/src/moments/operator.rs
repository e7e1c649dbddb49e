// SPDX-License-Identifier: Apache-2.0

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::exact::{Ladder, LindbladChannel};
use crate::spin_algebra::{embed, SpinRepresentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpinOp {
    Plus,
    Z,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub ensemble: usize,
    pub op: SpinOp,
}

impl Letter {
    pub fn new(ensemble: usize, op: SpinOp) -> Self {
        Self { ensemble, op }
    }
}

/// An arbitrary (not necessarily ordered) product of collective operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWord {
    pub coeff: Complex64,
    pub letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn new(coeff: Complex64, letters: Vec<Letter>) -> Self {
        Self { coeff, letters }
    }
}

/// `(a, b, c)` in `(J^+)^a (J^z)^b (J^-)^c`.
pub type Exponents = [u32; 3];

/// Canonical monomial: per-ensemble exponents sorted by ensemble, no zero triples.
pub type Signature = Vec<(usize, Exponents)>;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMonomial {
    pub coeff: Complex64,
    pub factors: Signature,
}

impl OperatorMonomial {
    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(_, e)| e.iter().sum::<u32>() as usize)
            .sum()
    }

    fn letters(factors: &Signature) -> Vec<Letter> {
        let mut out = Vec::new();
        for &(ens, [a, b, c]) in factors {
            for (op, k) in [(SpinOp::Plus, a), (SpinOp::Z, b), (SpinOp::Minus, c)] {
                out.extend(std::iter::repeat_n(Letter::new(ens, op), k as usize));
            }
        }
        out
    }
}

/// Sum of canonical monomials, one per signature, no zero coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorPolynomial {
    terms: BTreeMap<Signature, Complex64>,
}

impl OperatorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn letter(ensemble: usize, op: SpinOp) -> Self {
        let mut e = [0; 3];
        e[op as usize] = 1;
        let mut p = Self::zero();
        p.add_term(vec![(ensemble, e)], Complex64::new(1.0, 0.0));
        p
    }

    /// `J_a^+ J_b^-`.
    pub fn raise_lower(a: usize, b: usize) -> Self {
        Self::letter(a, SpinOp::Plus).mul(&Self::letter(b, SpinOp::Minus))
    }

    fn add_term(&mut self, sig: Signature, c: Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(sig) {
            Entry::Vacant(v) => {
                if c != zero {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == zero {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = OperatorMonomial> + '_ {
        self.terms.iter().map(|(f, c)| OperatorMonomial {
            coeff: *c,
            factors: f.clone(),
        })
    }

    pub fn coefficient(&self, factors: &Signature) -> Complex64 {
        self.terms.get(factors).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.monomials().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (sig, c) in &other.terms {
            out.add_term(sig.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for (sig, c) in &self.terms {
            out.add_term(sig.clone(), c * s);
        }
        out
    }

    /// Normal-ordered product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        let words: Vec<OperatorWord> = self
            .terms
            .iter()
            .flat_map(|(f1, c1)| {
                other.terms.iter().map(move |(f2, c2)| {
                    let mut letters = OperatorMonomial::letters(f1);
                    letters.extend(OperatorMonomial::letters(f2));
                    OperatorWord::new(c1 * c2, letters)
                })
            })
            .collect();
        normal_order(&words)
    }

    /// Hermitian conjugate; `(P^a Z^b M^c)^† = P^c Z^b M^a` stays canonical.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (sig, c) in &self.terms {
            let flipped = sig.iter().map(|&(e, [a, b, c])| (e, [c, b, a])).collect();
            out.add_term(flipped, c.conj());
        }
        out
    }

    /// The polynomial as a list of words, for re-ordering.
    pub fn to_words(&self) -> Vec<OperatorWord> {
        self.terms
            .iter()
            .map(|(f, c)| OperatorWord::new(*c, OperatorMonomial::letters(f)))
            .collect()
    }

    /// Matrix of the operator on the product of the given sectors.
    pub fn matrix_image(&self, reps: &[SpinRepresentation]) -> Result<DMatrix<Complex64>> {
        let dims: Vec<usize> = reps.iter().map(|r| r.dim()).collect();
        let d: usize = dims.iter().product();
        let ops: Vec<_> = reps.iter().map(|r| r.operators()).collect();
        let mut total = DMatrix::<Complex64>::zeros(d, d);
        for (sig, coeff) in &self.terms {
            let mut m = DMatrix::<f64>::identity(d, d);
            for &(ens, [a, b, c]) in sig {
                let o = &ops[ens];
                let mut local = DMatrix::<f64>::identity(dims[ens], dims[ens]);
                for _ in 0..a {
                    local = &local * &o.plus;
                }
                for _ in 0..b {
                    local = &local * &o.z;
                }
                for _ in 0..c {
                    local = &local * &o.minus;
                }
                m *= embed(&local, ens, &dims)?;
            }
            total += m.map(Complex64::from) * *coeff;
        }
        Ok(total)
    }
}

impl fmt::Display for OperatorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (sig, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for &(e, [a, b, cc]) in sig {
                for (name, k) in [("+", a), ("z", b), ("-", cc)] {
                    if k > 0 {
                        write!(f, " J{e}^{name}")?;
                        if k > 1 {
                            write!(f, "^{k}")?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rewrites each word with `J^-J^+ -> J^+J^- - 2J^z`, `J^zJ^+ -> J^+J^z + J^+`
/// and `J^-J^z -> J^zJ^- + J^-`; operators of different ensembles commute.
pub fn normal_order(words: &[OperatorWord]) -> OperatorPolynomial {
    let mut out = OperatorPolynomial::zero();
    for w in words {
        let mut per_ensemble: BTreeMap<usize, Vec<SpinOp>> = BTreeMap::new();
        for l in &w.letters {
            per_ensemble.entry(l.ensemble).or_default().push(l.op);
        }
        let mut partial: Vec<(Signature, f64)> = vec![(Vec::new(), 1.0)];
        for (ens, ops) in per_ensemble {
            let ordered = order_single(&ops);
            let mut next = Vec::with_capacity(partial.len() * ordered.len());
            for (sig, c) in &partial {
                for (exps, k) in &ordered {
                    let mut s = sig.clone();
                    if exps.iter().any(|&x| x > 0) {
                        s.push((ens, *exps));
                    }
                    next.push((s, c * k));
                }
            }
            partial = next;
        }
        for (sig, k) in partial {
            out.add_term(sig, w.coeff * k);
        }
    }
    out
}

fn order_single(word: &[SpinOp]) -> Vec<(Exponents, f64)> {
    let Some(i) = word.windows(2).position(|p| p[0] > p[1]) else {
        let mut e = [0u32; 3];
        for &op in word {
            e[op as usize] += 1;
        }
        return vec![(e, 1.0)];
    };
    let (x, y) = (word[i], word[i + 1]);
    let mut swapped = word.to_vec();
    swapped.swap(i, i + 1);
    let (extra, k) = match (x, y) {
        (SpinOp::Minus, SpinOp::Plus) => (SpinOp::Z, -2.0),
        (SpinOp::Z, SpinOp::Plus) => (SpinOp::Plus, 1.0),
        (SpinOp::Minus, SpinOp::Z) => (SpinOp::Minus, 1.0),
        _ => unreachable!("only out-of-order pairs reach here"),
    };
    let mut reduced = word[..i].to_vec();
    reduced.push(extra);
    reduced.extend_from_slice(&word[i + 2..]);

    let mut acc: BTreeMap<Exponents, f64> = BTreeMap::new();
    for (e, c) in order_single(&swapped) {
        *acc.entry(e).or_default() += c;
    }
    for (e, c) in order_single(&reduced) {
        *acc.entry(e).or_default() += k * c;
    }
    acc.into_iter().filter(|(_, c)| *c != 0.0).collect()
}

/// Jump operator of a channel as a polynomial.
pub fn channel_operator(channel: &LindbladChannel) -> OperatorPolynomial {
    channel
        .terms
        .iter()
        .fold(OperatorPolynomial::zero(), |acc, t| {
            let op = match t.ladder {
                Ladder::Raise => SpinOp::Plus,
                Ladder::Lower => SpinOp::Minus,
            };
            acc.add(&OperatorPolynomial::letter(t.ensemble, op).scale(Complex64::new(t.coeff, 0.0)))
        })
}

/// Heisenberg-picture generator `sum rate (2 O^† A O - O^†O A - A O^†O)`.
pub fn adjoint_rhs(
    observable: &OperatorPolynomial,
    channels: &[LindbladChannel],
) -> OperatorPolynomial {
    let mut out = OperatorPolynomial::zero();
    for ch in channels {
        if ch.rate == 0.0 {
            continue;
        }
        let o = channel_operator(ch);
        let od = o.adjoint();
        let odo = od.mul(&o);
        let term = od
            .mul(observable)
            .mul(&o)
            .scale(Complex64::new(2.0, 0.0))
            .sub(&odo.mul(observable))
            .sub(&observable.mul(&odo));
        out = out.add(&term.scale(Complex64::new(ch.rate, 0.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(letters: &[(usize, SpinOp)]) -> OperatorWord {
        OperatorWord::new(
            Complex64::new(1.0, 0.0),
            letters.iter().map(|&(e, o)| Letter::new(e, o)).collect(),
        )
    }

    fn one(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn lower_raise_reorders() {
        let p = normal_order(&[w(&[(0, SpinOp::Minus), (0, SpinOp::Plus)])]);
        let expected = OperatorPolynomial::raise_lower(0, 0)
            .sub(&OperatorPolynomial::letter(0, SpinOp::Z).scale(one(2.0)));
        assert_eq!(p, expected);
    }

    #[test]
    fn canonical_word_unchanged() {
        let p = normal_order(&[w(&[(0, SpinOp::Z), (0, SpinOp::Minus)])]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&vec![(0, [0, 1, 1])]), one(1.0));
    }

    #[test]
    fn different_ensembles_commute() {
        let p = normal_order(&[w(&[(1, SpinOp::Minus), (0, SpinOp::Plus)])]);
        assert_eq!(p, OperatorPolynomial::raise_lower(0, 1));
    }

    #[test]
    fn idempotent() {
        let p = normal_order(&[
            w(&[
                (0, SpinOp::Minus),
                (1, SpinOp::Z),
                (0, SpinOp::Plus),
                (0, SpinOp::Z),
            ]),
            w(&[(1, SpinOp::Minus), (1, SpinOp::Plus), (1, SpinOp::Plus)]),
        ]);
        assert_eq!(normal_order(&p.to_words()), p);
    }

    #[test]
    fn adjoint_flips_exponents() {
        let p = OperatorPolynomial::raise_lower(0, 1).scale(Complex64::new(0.0, 2.0));
        let a = p.adjoint();
        assert_eq!(
            a.coefficient(&vec![(0, [0, 0, 1]), (1, [1, 0, 0])]),
            Complex64::new(0.0, -2.0)
        );
    }

    #[test]
    fn superradiance_identities() {
        let ch = LindbladChannel::collective(Ladder::Lower, &[0], 0.5).unwrap();
        let z = OperatorPolynomial::letter(0, SpinOp::Z);
        // d J^z = -2 gamma J^+ J^-
        assert_eq!(
            adjoint_rhs(&z, std::slice::from_ref(&ch)),
            OperatorPolynomial::raise_lower(0, 0).scale(one(-1.0))
        );
        // d J^+J^- = 4 gamma J^+ J^z J^-
        let s = OperatorPolynomial::raise_lower(0, 0);
        let mut expected = OperatorPolynomial::zero();
        expected.add_term(vec![(0, [1, 1, 1])], one(2.0));
        assert_eq!(adjoint_rhs(&s, &[ch]), expected);
    }

    #[test]
    fn pump_on_jz() {
        let ch = LindbladChannel::collective(Ladder::Raise, &[0], 1.5).unwrap();
        let z = OperatorPolynomial::letter(0, SpinOp::Z);
        let expected = OperatorPolynomial::raise_lower(0, 0)
            .scale(one(3.0))
            .sub(&z.scale(one(6.0)));
        assert_eq!(adjoint_rhs(&z, &[ch]), expected);
    }

    #[test]
    fn battery_energy_cross_terms() {
        let ch = LindbladChannel::collective(Ladder::Lower, &[0, 1], 1.0).unwrap();
        let zb = OperatorPolynomial::letter(1, SpinOp::Z);
        let expected = OperatorPolynomial::raise_lower(1, 1)
            .scale(one(-2.0))
            .sub(&OperatorPolynomial::raise_lower(1, 0))
            .sub(&OperatorPolynomial::raise_lower(0, 1));
        assert_eq!(adjoint_rhs(&zb, &[ch]), expected);
    }
}
