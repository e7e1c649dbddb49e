// SPDX-License-Identifier: Apache-2.0

//! Dormand-Prince 5(4) with step-size control and fourth-order dense output.
//!
//! Coefficients and the continuous extension follow Hairer, Nørsett & Wanner,
//! "Solving Ordinary Differential Equations I", routine DOPRI5. The state is a
//! plain slice so both the real mean-field vectors and the complex Liouville
//! vectors of the exact solver can be integrated by the same code.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Element type of an integrable state vector.
pub trait OdeScalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
    fn is_finite(self) -> bool;
}

impl OdeScalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl OdeScalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Callbacks fired during integration.
pub trait Observer<E> {
    /// Called once for every requested output time, in order.
    fn output(&mut self, index: usize, t: f64, y: &[E]) -> Result<()>;

    /// Called after every accepted step with the new state and its derivative.
    fn accepted_step(&mut self, _t: f64, _y: &[E], _dydt: &[E]) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }

    /// Integrates `f(t, y, dydt)` from `grid[0]` through the strictly
    /// increasing output `grid`, reporting each grid point to `observer`.
    pub fn integrate<E, F, O>(
        &self,
        mut f: F,
        y0: &[E],
        grid: &[f64],
        observer: &mut O,
    ) -> Result<OdeStats>
    where
        E: OdeScalar,
        F: FnMut(f64, &[E], &mut [E]),
        O: Observer<E>,
    {
        let Some((&t0, rest)) = grid.split_first() else {
            return Err(Error::invalid("tau_grid", "empty output grid"));
        };
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("tau_grid", "must be strictly increasing"));
        }
        observer.output(0, t0, y0)?;
        let mut stats = OdeStats::default();
        let Some(&t_end) = rest.last() else {
            return Ok(stats);
        };

        let n = y0.len();
        let mut y = y0.to_vec();
        let mut y_new = vec![E::default(); n];
        let mut y_stage = vec![E::default(); n];
        let mut k: [Vec<E>; 7] = std::array::from_fn(|_| vec![E::default(); n]);
        let mut cont: [Vec<E>; 5] = std::array::from_fn(|_| vec![E::default(); n]);
        let mut dense = vec![E::default(); n];

        let mut t = t0;
        f(t, &y, &mut k[0]);
        stats.evaluations += 1;
        let mut h = self.initial_step(&mut f, t, &y, &k[0], t_end - t0, &mut stats);
        let mut next_out = 1;
        let mut facold: f64 = 1e-4;
        let mut last_rejected = false;

        let fail = |t: f64, reason: String| Error::IntegrationFailure { tau: t, reason };

        while next_out < grid.len() {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(fail(
                    t,
                    format!("step budget of {} exhausted", self.max_steps),
                ));
            }
            h = h.min(self.h_max).min(t_end - t);
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(fail(t, format!("step size underflow (h = {h:.3e})")));
            }

            for (s, row) in A.iter().enumerate() {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, &a) in row.iter().enumerate().take(s + 1) {
                        if a != 0.0 {
                            acc = acc + k[j][i] * (h * a);
                        }
                    }
                    y_stage[i] = acc;
                }
                f(t + C[s + 1] * h, &y_stage, &mut k[s + 1]);
                stats.evaluations += 1;
                if s == 5 {
                    y_new.copy_from_slice(&y_stage);
                }
            }

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = E::default();
                for (j, &ej) in ERR.iter().enumerate() {
                    if ej != 0.0 {
                        e = e + k[j][i] * ej;
                    }
                }
                let sc = self.atol + self.rtol * y[i].magnitude().max(y_new[i].magnitude());
                let r = (e * h).magnitude() / sc;
                err_sq += r * r;
            }
            let err = if n == 0 {
                0.0
            } else {
                (err_sq / n as f64).sqrt()
            };
            if !err.is_finite() {
                h *= 0.1;
                stats.rejected += 1;
                last_rejected = true;
                continue;
            }

            let fac11 = err.powf(0.2 - BETA * 0.75);
            if err <= 1.0 {
                let mut fac = fac11 / facold.powf(BETA);
                fac = (fac / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                facold = err.max(1e-4);

                // dense output coefficients for [t, t + h]
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = k[0][i] * h - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - k[6][i] * h - bspl;
                    let mut d = E::default();
                    for (j, &dj) in DENSE.iter().enumerate() {
                        if dj != 0.0 {
                            d = d + k[j][i] * dj;
                        }
                    }
                    cont[4][i] = d * h;
                }
                if y_new.iter().any(|v| !v.is_finite()) {
                    return Err(fail(t, "non-finite state".into()));
                }

                let t_new = if t_end - (t + h) <= 1e-12 * t_end.abs().max(1.0) {
                    t_end
                } else {
                    t + h
                };
                while next_out < grid.len() && grid[next_out] <= t_new {
                    let theta = (grid[next_out] - t) / h;
                    if grid[next_out] == t_new {
                        dense.copy_from_slice(&y_new);
                    } else {
                        let theta1 = 1.0 - theta;
                        for i in 0..n {
                            dense[i] = cont[0][i]
                                + (cont[1][i]
                                    + (cont[2][i] + (cont[3][i] + cont[4][i] * theta1) * theta)
                                        * theta1)
                                    * theta;
                        }
                    }
                    observer.output(next_out, grid[next_out], &dense)?;
                    next_out += 1;
                }

                // FSAL
                k.swap(0, 6);
                std::mem::swap(&mut y, &mut y_new);
                t = t_new;
                stats.accepted += 1;
                observer.accepted_step(t, &y, &k[0])?;
                h = h_new;
                last_rejected = false;
            } else {
                h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
                stats.rejected += 1;
                last_rejected = true;
            }
        }
        Ok(stats)
    }

    fn initial_step<E, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[E],
        f0: &[E],
        span: f64,
        stats: &mut OdeStats,
    ) -> f64
    where
        E: OdeScalar,
        F: FnMut(f64, &[E], &mut [E]),
    {
        let n = y.len().max(1) as f64;
        let sk = |i: usize| self.atol + self.rtol * y[i].magnitude();
        let dnf = (0..y.len())
            .map(|i| (f0[i].magnitude() / sk(i)).powi(2))
            .sum::<f64>()
            / n;
        let dny = (0..y.len())
            .map(|i| (y[i].magnitude() / sk(i)).powi(2))
            .sum::<f64>()
            / n;
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.h_max).min(span);
        let y1: Vec<E> = (0..y.len()).map(|i| y[i] + f0[i] * h).collect();
        let mut f1 = vec![E::default(); y.len()];
        f(t + h, &y1, &mut f1);
        stats.evaluations += 1;
        let der2 = ((0..y.len())
            .map(|i| ((f1[i] - f0[i]).magnitude() / sk(i)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.h_max).min(span)
    }
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

// Row s holds the coefficients of stage s + 1.
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const DENSE: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];
