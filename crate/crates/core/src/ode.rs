//! Adaptive explicit Runge–Kutta integration of complex linear systems.
//!
//! Dormand–Prince 8(5,3): eighth-order propagation with the combined
//! fifth/third-order error estimate and standard step-size control.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode_tableau::{A, B, C, E3, E5, STAGES};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

/// Right-hand side `dy/dt = rhs(t, y)` written into the output slice.
pub trait System {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

impl<F: Fn(f64, &[Complex64], &mut [Complex64])> System for F {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        self(t, y, dy)
    }
}

/// Stepper state. `advance_to` lands exactly on each requested time.
pub struct Integrator<S: System> {
    system: S,
    tol: Tolerances,
    t: f64,
    y: Vec<Complex64>,
    /// Derivative at `(t, y)` (first-same-as-last).
    f: Vec<Complex64>,
    h: Option<f64>,
    k: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
    steps: usize,
    rejected: usize,
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / n.max(1) as f64).sqrt()
}

impl<S: System> Integrator<S> {
    pub fn new(system: S, t0: f64, y0: Vec<Complex64>, tol: Tolerances) -> Self {
        let n = y0.len();
        let mut f = vec![Complex64::default(); n];
        system.rhs(t0, &y0, &mut f);
        Self {
            system,
            tol,
            t: t0,
            y: y0,
            f,
            h: None,
            k: vec![vec![Complex64::default(); n]; STAGES + 1],
            scratch: vec![Complex64::default(); n],
            steps: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[Complex64] {
        &self.y
    }

    /// Accepted and rejected step counts.
    pub fn stats(&self) -> (usize, usize) {
        (self.steps, self.rejected)
    }

    fn initial_step(&self, direction: f64) -> f64 {
        let n = self.y.len();
        let scale: Vec<f64> = self
            .y
            .iter()
            .map(|y| self.tol.atol + self.tol.rtol * y.norm())
            .collect();
        let d0 = rms(self.y.iter().zip(&scale).map(|(y, s)| y.norm() / s), n);
        let d1 = rms(self.f.iter().zip(&scale).map(|(f, s)| f.norm() / s), n);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1: Vec<Complex64> = self
            .y
            .iter()
            .zip(&self.f)
            .map(|(y, f)| y + f * (h0 * direction))
            .collect();
        let mut f1 = vec![Complex64::default(); n];
        self.system.rhs(self.t + h0 * direction, &y1, &mut f1);
        let d2 = rms(
            f1.iter()
                .zip(&self.f)
                .zip(&scale)
                .map(|((a, b), s)| (a - b).norm() / s),
            n,
        ) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.tol.max_step)
    }

    /// One trial step of size `h`; returns the scaled error norm and leaves the proposal in `scratch`.
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        self.k[0].copy_from_slice(&self.f);
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = Complex64::default();
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.scratch[i] = self.y[i] + acc * h;
            }
            self.system
                .rhs(self.t + C[s] * h, &self.scratch, &mut self.k[s]);
        }
        for i in 0..n {
            let mut acc = Complex64::default();
            for (j, b) in B.iter().enumerate() {
                if *b != 0.0 {
                    acc += self.k[j][i] * *b;
                }
            }
            self.scratch[i] = self.y[i] + acc * h;
        }
        self.system
            .rhs(self.t + h, &self.scratch, &mut self.k[STAGES]);

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let scale =
                self.tol.atol + self.tol.rtol * self.y[i].norm().max(self.scratch[i].norm());
            let mut e5 = Complex64::default();
            let mut e3 = Complex64::default();
            for j in 0..=STAGES {
                e5 += self.k[j][i] * E5[j];
                e3 += self.k[j][i] * E3[j];
            }
            err5 += (e5 / scale).norm_sqr();
            err3 += (e3 / scale).norm_sqr();
        }
        if err5 == 0.0 && err3 == 0.0 {
            return 0.0;
        }
        h.abs() * err5 / ((err5 + 0.01 * err3) * n as f64).sqrt()
    }

    /// Integrate up to exactly `t_end`, calling `on_step(t, y)` after every accepted step.
    pub fn advance_to(
        &mut self,
        t_end: f64,
        mut on_step: impl FnMut(f64, &[Complex64]) -> Result<()>,
    ) -> Result<()> {
        if t_end == self.t {
            return Ok(());
        }
        let direction = (t_end - self.t).signum();
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(direction),
        };
        let mut rejected_last = false;
        while (t_end - self.t) * direction > 0.0 {
            let min_step = 10.0 * f64::EPSILON * self.t.abs().max(t_end.abs()).max(1.0);
            h = h.min(self.tol.max_step);
            let remaining = (t_end - self.t).abs();
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step < min_step && !landing {
                return Err(Error::StepUnderflow { tau: self.t, step });
            }
            let err = self.try_step(step * direction);
            if err <= 1.0 {
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
                };
                let factor = if rejected_last {
                    factor.min(1.0)
                } else {
                    factor
                };
                self.t = if landing {
                    t_end
                } else {
                    self.t + step * direction
                };
                std::mem::swap(&mut self.y, &mut self.scratch);
                self.f.copy_from_slice(&self.k[STAGES]);
                self.steps += 1;
                rejected_last = false;
                // A short landing step says nothing about the natural step size.
                if !landing || factor < 1.0 {
                    h = step * factor;
                }
                on_step(self.t, &self.y)?;
            } else {
                self.rejected += 1;
                rejected_last = true;
                h = step * (SAFETY * err.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
                if h < min_step {
                    return Err(Error::StepUnderflow {
                        tau: self.t,
                        step: h,
                    });
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }
}
