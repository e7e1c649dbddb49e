// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::closure::{cumulant_close, format_expr, moment_name, Moment, MomentExpr};
use super::operator::{adjoint_rhs, OperatorPolynomial, SpinOp};
use crate::error::{Error, Result};
use crate::exact::{build_channels, LindbladChannel};
use crate::scenario::{Level, ScenarioConfig};

/// Dynamical variable; `Moment::S(a, b)` always has `a <= b` here.
pub type Variable = Moment;

/// First and second moments of all ensembles.
///
/// `s` is the upper triangle `a <= b` of `<J_a^+ J_b^->` packed row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub z: Vec<f64>,
    pub s: Vec<Complex64>,
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a <= b && b < n);
    a * n - a * (a + 1) / 2 + b
}

impl MomentState {
    pub fn zeros(n_ensembles: usize) -> Self {
        Self {
            z: vec![0.0; n_ensembles],
            s: vec![Complex64::new(0.0, 0.0); n_ensembles * (n_ensembles + 1) / 2],
        }
    }

    pub fn n_ensembles(&self) -> usize {
        self.z.len()
    }

    /// `<J_a^+ J_b^->` for any ordering of the pair.
    pub fn s(&self, a: usize, b: usize) -> Complex64 {
        let n = self.n_ensembles();
        if a <= b {
            self.s[pair_index(n, a, b)]
        } else {
            self.s[pair_index(n, b, a)].conj()
        }
    }

    pub fn set_s(&mut self, a: usize, b: usize, v: Complex64) {
        let n = self.n_ensembles();
        if a <= b {
            self.s[pair_index(n, a, b)] = v;
        } else {
            self.s[pair_index(n, b, a)] = v.conj();
        }
    }

    pub fn value(&self, m: Moment) -> Complex64 {
        match m {
            Moment::Z(a) => Complex64::new(self.z[a], 0.0),
            Moment::S(a, b) => self.s(a, b),
        }
    }

    /// Flat real layout: `z` entries, then `(re, im)` for every packed pair.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.z.clone();
        for v in &self.s {
            out.push(v.re);
            out.push(v.im);
        }
        out
    }

    pub fn from_flat(n_ensembles: usize, flat: &[f64]) -> Self {
        let n_pairs = n_ensembles * (n_ensembles + 1) / 2;
        assert_eq!(
            flat.len(),
            n_ensembles + 2 * n_pairs,
            "flat moment vector has wrong length"
        );
        let z = flat[..n_ensembles].to_vec();
        let s = flat[n_ensembles..]
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Self { z, s }
    }

    /// Energy density `z / N + 1/2` for each ensemble.
    pub fn energies(&self, sizes: &[usize]) -> Vec<f64> {
        self.z
            .iter()
            .zip(sizes)
            .map(|(z, &n)| z / n as f64 + 0.5)
            .collect()
    }
}

/// Closed equations of motion for `z_mu` and `s_{mu nu}`, `mu <= nu`.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    labels: Vec<String>,
    equations: Vec<(Variable, MomentExpr)>,
}

impl MomentSystem {
    pub fn from_channels(labels: Vec<String>, channels: &[LindbladChannel]) -> Result<Self> {
        let n = labels.len();
        for ch in channels {
            ch.check_ensembles(n)?;
        }
        let mut equations = Vec::new();
        for a in 0..n {
            let obs = OperatorPolynomial::letter(a, SpinOp::Z);
            equations.push((Moment::Z(a), cumulant_close(&adjoint_rhs(&obs, channels))?));
        }
        for a in 0..n {
            for b in a..n {
                let obs = OperatorPolynomial::raise_lower(a, b);
                equations.push((
                    Moment::S(a, b),
                    cumulant_close(&adjoint_rhs(&obs, channels))?,
                ));
            }
        }
        Ok(Self { labels, equations })
    }

    pub fn n_ensembles(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn equations(&self) -> &[(Variable, MomentExpr)] {
        &self.equations
    }

    pub fn equation(&self, v: Variable) -> Option<&MomentExpr> {
        self.equations.iter().find(|(w, _)| *w == v).map(|(_, e)| e)
    }

    /// Time derivative of every variable at `state`.
    pub fn derivative(&self, state: &MomentState) -> MomentState {
        let mut out = MomentState::zeros(self.n_ensembles());
        for (v, expr) in &self.equations {
            let d = expr.evaluate(|m| state.value(m));
            match *v {
                Moment::Z(a) => out.z[a] = d.re,
                Moment::S(a, b) if a == b => out.set_s(a, a, Complex64::new(d.re, 0.0)),
                Moment::S(a, b) => out.set_s(a, b, d),
            }
        }
        out
    }

    /// Compiles the system for variables rescaled by `z/N_a`, `s/(N_a N_b)`
    /// with all rates divided by `time_scale`.
    pub fn compile(&self, sizes: &[usize], time_scale: f64) -> Result<MomentTape> {
        let n = self.n_ensembles();
        if sizes.len() != n {
            return Err(Error::invalid(
                "battery_sizes",
                format!("{} ensemble sizes for {} ensembles", sizes.len(), n),
            ));
        }
        if !(time_scale > 0.0 && time_scale.is_finite()) {
            return Err(Error::invalid("time_scale", "must be positive and finite"));
        }
        let scale = |m: Moment| match m {
            Moment::Z(a) => sizes[a] as f64,
            Moment::S(a, b) => sizes[a] as f64 * sizes[b] as f64,
        };
        let mut terms = Vec::new();
        for (v, expr) in &self.equations {
            let (slot, real) = match *v {
                Moment::Z(a) => (a, true),
                Moment::S(a, b) => (n + 2 * pair_index(n, a, b), a == b),
            };
            for (factors, c) in expr.terms() {
                let mut idx = [0u32; 3];
                let mut k = 1.0 / (scale(*v) * time_scale);
                for (i, m) in factors.iter().enumerate() {
                    k *= scale(*m);
                    idx[i] = match *m {
                        Moment::Z(a) => a as u32,
                        Moment::S(a, b) => (n + a * n + b) as u32,
                    };
                }
                terms.push(TapeTerm {
                    slot,
                    real,
                    coeff: c * k,
                    factors: idx,
                    len: factors.len() as u8,
                });
            }
        }
        Ok(MomentTape { n, terms })
    }

    /// Human-readable listing, one equation per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, expr) in &self.equations {
            out.push_str(&format!(
                "d{}/dt = {}\n",
                moment_name(*v, &self.labels),
                format_expr(expr, &self.labels)
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
struct TapeTerm {
    slot: usize,
    real: bool,
    coeff: Complex64,
    factors: [u32; 3],
    len: u8,
}

/// Flat evaluation program over the real layout of [`MomentState::to_flat`].
#[derive(Debug, Clone)]
pub struct MomentTape {
    n: usize,
    terms: Vec<TapeTerm>,
}

impl MomentTape {
    pub fn state_len(&self) -> usize {
        self.n + self.n * (self.n + 1)
    }

    /// Writes `dy/dt`; `values` is scratch space reused between calls.
    pub fn evaluate(&self, y: &[f64], dy: &mut [f64], values: &mut Vec<Complex64>) {
        let n = self.n;
        values.clear();
        values.extend(y[..n].iter().map(|&z| Complex64::new(z, 0.0)));
        for a in 0..n {
            for b in 0..n {
                let v = if a <= b {
                    let k = n + 2 * pair_index(n, a, b);
                    Complex64::new(y[k], y[k + 1])
                } else {
                    let k = n + 2 * pair_index(n, b, a);
                    Complex64::new(y[k], -y[k + 1])
                };
                values.push(v);
            }
        }
        dy.fill(0.0);
        for t in &self.terms {
            let mut p = t.coeff;
            for &f in &t.factors[..t.len as usize] {
                p *= values[f as usize];
            }
            dy[t.slot] += p.re;
            if !t.real {
                dy[t.slot + 1] += p.im;
            }
        }
    }
}

/// Builds the closed system for a scenario.
pub fn generate_moment_system(scenario: &ScenarioConfig) -> Result<MomentSystem> {
    scenario.validate()?;
    let channels = build_channels(scenario)?;
    MomentSystem::from_channels(scenario.ensemble_labels(), &channels)
}

/// Moments of the product of fully excited or ground symmetric states.
pub fn initial_moments(scenario: &ScenarioConfig) -> Result<MomentState> {
    scenario.validate()?;
    let sizes = scenario.ensemble_sizes();
    let mut st = MomentState::zeros(sizes.len());
    for (a, (&n, level)) in sizes.iter().zip(&scenario.initial_levels).enumerate() {
        let half = n as f64 / 2.0;
        let (z, s) = match level {
            Level::Excited => (half, n as f64),
            Level::Ground => (-half, 0.0),
        };
        st.z[a] = z;
        st.set_s(a, a, Complex64::new(s, 0.0));
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_roundtrip() {
        let mut st = MomentState::zeros(3);
        st.z = vec![1.0, 2.0, 3.0];
        st.set_s(2, 0, Complex64::new(0.5, 0.25));
        let back = MomentState::from_flat(3, &st.to_flat());
        assert_eq!(back, st);
        assert_eq!(back.s(0, 2), Complex64::new(0.5, -0.25));
    }

    #[test]
    fn tape_matches_direct_evaluation() {
        let sc = ScenarioConfig::new(7, vec![3, 5], 1.0, 0.7).with_reservoirs(2);
        let sys = generate_moment_system(&sc).unwrap();
        let mut st = MomentState::zeros(3);
        st.z = vec![0.3, -1.2, 2.0];
        for a in 0..3 {
            for b in a..3 {
                let im = if a == b {
                    0.0
                } else {
                    0.1 * (a + 2 * b) as f64
                };
                st.set_s(a, b, Complex64::new(1.0 + (a * 3 + b) as f64, im));
            }
        }
        let direct = sys.derivative(&st);
        let tape = sys.compile(&[1, 1, 1], 1.0).unwrap();
        let mut dy = vec![0.0; tape.state_len()];
        tape.evaluate(&st.to_flat(), &mut dy, &mut Vec::new());
        for (a, b) in direct.to_flat().iter().zip(&dy) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn scaled_tape_is_consistent() {
        let sc = ScenarioConfig::new(10, vec![4], 1.0, 0.5);
        let sys = generate_moment_system(&sc).unwrap();
        let sizes = sc.ensemble_sizes();
        let st = initial_moments(&sc).unwrap();
        let direct = sys.derivative(&st);
        let tape = sys.compile(&sizes, 10.0).unwrap();
        let scaled = MomentState {
            z: st
                .z
                .iter()
                .zip(&sizes)
                .map(|(z, &n)| z / n as f64)
                .collect(),
            s: vec![st.s(0, 0) / 100.0, st.s(0, 1) / 40.0, st.s(1, 1) / 16.0],
        };
        let mut dy = vec![0.0; tape.state_len()];
        tape.evaluate(&scaled.to_flat(), &mut dy, &mut Vec::new());
        assert!((dy[0] - direct.z[0] / 100.0).abs() < 1e-12);
        assert!((dy[1] - direct.z[1] / 40.0).abs() < 1e-12);
    }
}
