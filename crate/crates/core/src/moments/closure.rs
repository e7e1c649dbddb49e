// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::operator::OperatorPolynomial;
use crate::error::{Error, Result};

/// A closed first- or second-order moment.
///
/// `S(a, b)` is `<J_a^+ J_b^->`; `S(b, a)` is its complex conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Moment {
    Z(usize),
    S(usize, usize),
}

/// Polynomial in the moments; keys are sorted factor lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentExpr {
    terms: BTreeMap<Vec<Moment>, Complex64>,
}

impl MomentExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, mut factors: Vec<Moment>, c: Complex64) {
        factors.sort();
        let entry = self.terms.entry(factors.clone()).or_default();
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&factors);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Moment], Complex64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, factors: &[Moment]) -> Complex64 {
        let mut key = factors.to_vec();
        key.sort();
        self.terms.get(&key).copied().unwrap_or_default()
    }

    /// Evaluates with user-supplied moment values.
    pub fn evaluate(&self, value: impl Fn(Moment) -> Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(fs, c)| fs.iter().fold(*c, |acc, m| acc * value(*m)))
            .sum()
    }

    /// Largest relative difference of coefficients against `other`.
    pub fn max_coefficient_difference(&self, other: &Self) -> f64 {
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.map(|k| {
            let a = self.terms.get(k).copied().unwrap_or_default();
            let b = other.terms.get(k).copied().unwrap_or_default();
            (a - b).norm() / a.norm().max(b.norm()).max(1.0)
        })
        .fold(0.0, f64::max)
    }
}

/// Writes moment names from ensemble labels: `z_C`, `s_C_B1`.
pub(crate) fn moment_name(m: Moment, labels: &[String]) -> String {
    match m {
        Moment::Z(a) => format!("z_{}", labels[a]),
        Moment::S(a, b) => format!("s_{}_{}", labels[a], labels[b]),
    }
}

pub(crate) fn format_expr(expr: &MomentExpr, labels: &[String]) -> String {
    if expr.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (factors, c)) in expr.terms().enumerate() {
        let (negative, mag) = if c.im == 0.0 {
            (c.re < 0.0, format_real(c.re.abs()))
        } else {
            (false, format!("({}{:+}i)", c.re, c.im))
        };
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let names: Vec<String> = factors.iter().map(|m| moment_name(*m, labels)).collect();
        match (mag.as_str(), names.is_empty()) {
            (m, true) => out.push_str(m),
            ("1", false) => out.push_str(&names.join("*")),
            (m, false) => {
                out.push_str(m);
                out.push('*');
                out.push_str(&names.join("*"));
            }
        }
    }
    out
}

fn format_real(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for MomentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self
            .terms
            .keys()
            .flatten()
            .map(|m| match *m {
                Moment::Z(a) => a,
                Moment::S(a, b) => a.max(b),
            })
            .max()
            .map_or(0, |x| x + 1);
        let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        f.write_str(&format_expr(self, &labels))
    }
}

/// Second-order cumulant closure of normal-ordered monomials up to degree 3.
pub fn cumulant_close(poly: &OperatorPolynomial) -> Result<MomentExpr> {
    let mut out = MomentExpr::zero();
    for mono in poly.monomials() {
        let degree = mono.degree();
        if degree > 3 {
            return Err(Error::UnsupportedClosure { degree });
        }
        let mut raise = Vec::new();
        let mut lower = Vec::new();
        let mut zs = Vec::new();
        for &(ens, [a, b, c]) in &mono.factors {
            raise.extend(std::iter::repeat_n(ens, a as usize));
            zs.extend(std::iter::repeat_n(ens, b as usize));
            lower.extend(std::iter::repeat_n(ens, c as usize));
        }
        if raise.len() != lower.len() {
            continue;
        }
        let mut factors: Vec<Moment> = zs.into_iter().map(Moment::Z).collect();
        if let (Some(&a), Some(&b)) = (raise.first(), lower.first()) {
            factors.push(Moment::S(a, b));
        }
        out.add_term(factors, mono.coeff);
    }
    Ok(out)
}
