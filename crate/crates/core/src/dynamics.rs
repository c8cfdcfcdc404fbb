//! Time evolution of the winding-number amplitudes.
//!
//! The propagated equations are
//! `i dc_n/dtau = (n - f(tau))^2 c_n + sum_q u_q c_{n-q}`
//! on a finite [`ModeWindow`]. States in the direct picture are integrated as
//! they stand; states handed over in the interaction picture
//! (`a_n = c_n exp(+i int_0^tau (n - f)^2)`) are integrated with the
//! interaction-picture equations, which gives an independent second route.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    free_energy, ring_normalization, FluxProgram, ModeWindow, Picture, RingPotential, WaveState,
};
use crate::ode::{Integrator, Tolerances};

/// Number of uniformly spaced samples produced by [`evolve`].
pub const DEFAULT_SAMPLES: usize = 400;

/// Probability mass left out when sizing a window around an initial state.
const WINDOW_TAIL: f64 = 1e-12;
const WINDOW_MARGIN: i64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Largest allowed fraction of the probability in the two outermost modes on either edge.
    pub boundary_guard: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: 10.0,
            boundary_guard: 1e-8,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(invalid("rtol and atol must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(invalid("max_step must be positive"));
        }
        if !(self.boundary_guard > 0.0 && self.boundary_guard < 1.0) {
            return Err(invalid("boundary_guard must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Sampled solution of one propagation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveState>,
    pub norms: Vec<f64>,
    pub mean_winding: Vec<f64>,
    /// Largest edge fraction seen at any accepted step.
    pub max_boundary_fraction: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn window(&self) -> ModeWindow {
        self.states[0].window
    }

    pub fn last(&self) -> &WaveState {
        self.states
            .last()
            .expect("trajectories hold at least one sample")
    }

    /// `|c_n(tau_k)|` for every sample.
    pub fn moduli(&self, n: i64) -> Vec<f64> {
        self.states.iter().map(|s| s.amp(n).norm()).collect()
    }

    /// Rows `tau, n, re_c, im_c, abs2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,n,re_c,im_c,abs2")?;
        for s in &self.states {
            for (n, c) in s.window.modes().zip(&s.amps) {
                writeln!(w, "{},{},{},{},{}", s.tau, n, c.re, c.im, c.norm_sqr())?;
            }
        }
        Ok(())
    }

    /// Rows `tau, phi, re_psi, im_psi, abs2` on the given angles (direct-picture states only).
    pub fn write_wavefunction_csv<W: Write>(&self, mut w: W, phis: &[f64]) -> Result<()> {
        writeln!(w, "tau,phi,re_psi,im_psi,abs2")?;
        for s in &self.states {
            let psi = reconstruct_wavefunction(s, phis)?;
            for (phi, z) in phis.iter().zip(psi) {
                writeln!(w, "{},{},{},{},{}", s.tau, phi, z.re, z.im, z.norm_sqr())?;
            }
        }
        Ok(())
    }
}

/// `n_samples` points spread uniformly over `[t0, t1]`, endpoints included.
pub fn uniform_times(t0: f64, t1: f64, n_samples: usize) -> Vec<f64> {
    match n_samples {
        0 => vec![],
        1 => vec![t1],
        n => (0..n)
            .map(|k| {
                if k + 1 == n {
                    t1
                } else {
                    t0 + (t1 - t0) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Sparse coupling table: for row `i`, the `(j, u)` with `j = index(n_i - q)`.
fn couplings(p: &RingPotential, window: ModeWindow) -> Vec<Vec<(usize, i64, Complex64)>> {
    window
        .modes()
        .map(|n| {
            p.harmonics()
                .filter_map(|(q, u)| window.index_of(n - q).map(|j| (j, n - q, u)))
                .collect()
        })
        .collect()
}

/// Propagate `initial` over `tau_span` with [`DEFAULT_SAMPLES`] uniform samples.
pub fn evolve(
    p: &RingPotential,
    flux: FluxProgram,
    window: ModeWindow,
    initial: &WaveState,
    tau_span: (f64, f64),
    cfg: &PropagatorConfig,
) -> Result<Trajectory> {
    if initial.tau != tau_span.0 {
        return Err(Error::Mismatch(format!(
            "initial state is at tau = {} but the span starts at {}",
            initial.tau, tau_span.0
        )));
    }
    let times = uniform_times(tau_span.0, tau_span.1, DEFAULT_SAMPLES);
    evolve_sampled(p, flux, window, initial, &times, cfg)
}

/// Propagate `initial` and record the state at each of `times` (strictly increasing, not before `initial.tau`).
pub fn evolve_sampled(
    p: &RingPotential,
    flux: FluxProgram,
    window: ModeWindow,
    initial: &WaveState,
    times: &[f64],
    cfg: &PropagatorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    flux.validate()?;
    if initial.window != window {
        return Err(Error::Mismatch(format!(
            "initial state window {:?} differs from propagation window {:?}",
            initial.window, window
        )));
    }
    if times.is_empty() {
        return Err(invalid("no sample times requested"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) || times[0] < initial.tau {
        return Err(invalid(
            "sample times must increase strictly and not precede the initial state",
        ));
    }

    let table = couplings(p, window);
    let modes: Vec<f64> = window.modes().map(|n| n as f64).collect();
    let tol = Tolerances {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_step: cfg.max_step,
    };
    let picture = initial.picture;
    let guard = cfg.boundary_guard;

    let mut max_fraction = 0.0f64;
    let mut check = |tau: f64, y: &[Complex64]| -> Result<()> {
        let fraction = edge_fraction(y);
        max_fraction = max_fraction.max(fraction);
        if fraction > guard {
            return Err(Error::BoundaryMassExceeded {
                tau,
                fraction,
                guard,
                n_min: window.n_min(),
                n_max: window.n_max(),
            });
        }
        Ok(())
    };
    check(initial.tau, &initial.amps)?;

    let mut states = Vec::with_capacity(times.len());
    let steps = match picture {
        Picture::Direct => {
            let rhs = |tau: f64, c: &[Complex64], dc: &mut [Complex64]| {
                let f = flux.at(tau);
                for (i, row) in table.iter().enumerate() {
                    let d = modes[i] - f;
                    let mut acc = c[i] * (d * d);
                    for &(j, _, u) in row {
                        acc += u * c[j];
                    }
                    // -i * acc
                    dc[i] = Complex64::new(acc.im, -acc.re);
                }
            };
            let mut integ = Integrator::new(rhs, initial.tau, initial.amps.clone(), tol);
            for &t in times {
                integ.advance_to(t, &mut check)?;
                states.push(WaveState {
                    tau: t,
                    window,
                    amps: integ.state().to_vec(),
                    picture,
                });
            }
            integ.stats().0
        }
        Picture::Interaction => {
            let rhs = |tau: f64, a: &[Complex64], da: &mut [Complex64]| {
                let big_f = flux_integral(&flux, tau);
                for (i, row) in table.iter().enumerate() {
                    let n = modes[i];
                    let mut acc = Complex64::default();
                    for &(j, m, u) in row {
                        let m = m as f64;
                        // Phi_n - Phi_m = (n - m) ((n + m) tau - 2 int f)
                        let phase = (n - m) * ((n + m) * tau - 2.0 * big_f);
                        acc += u * Complex64::from_polar(1.0, phase) * a[j];
                    }
                    da[i] = Complex64::new(acc.im, -acc.re);
                }
            };
            let mut integ = Integrator::new(rhs, initial.tau, initial.amps.clone(), tol);
            for &t in times {
                integ.advance_to(t, &mut check)?;
                states.push(WaveState {
                    tau: t,
                    window,
                    amps: integ.state().to_vec(),
                    picture,
                });
            }
            integ.stats().0
        }
    };

    let norms = states.iter().map(WaveState::norm_sqr).collect();
    let mean_winding = states.iter().map(WaveState::mean_winding).collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        norms,
        mean_winding,
        max_boundary_fraction: max_fraction,
        steps,
    })
}

fn edge_fraction(y: &[Complex64]) -> f64 {
    let total: f64 = y.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let k = 2.min(y.len() / 2);
    let len = y.len();
    let edge: f64 = y[..k]
        .iter()
        .chain(&y[len - k..])
        .map(|c| c.norm_sqr())
        .sum();
    edge / total
}

/// `int_0^tau f(t) dt`.
fn flux_integral(flux: &FluxProgram, tau: f64) -> f64 {
    match *flux {
        FluxProgram::Static { f0 } => f0 * tau,
        FluxProgram::Ramp { sigma, tau0 } => sigma * (0.5 * tau * tau - tau0 * tau),
    }
}

/// Window for a propagation: the modes carrying all but `1e-12` of the initial
/// probability, widened by the flux excursion over the span in the direction
/// the flux moves, plus four guard modes on each side.
pub fn auto_window(
    initial: &WaveState,
    flux: FluxProgram,
    tau_span: (f64, f64),
) -> Result<ModeWindow> {
    let total = initial.norm_sqr();
    if total == 0.0 {
        return Err(invalid("initial state is zero"));
    }
    let probs: Vec<f64> = initial.amps.iter().map(|c| c.norm_sqr() / total).collect();
    let mut lo = 0;
    let mut dropped = 0.0;
    while lo + 1 < probs.len() && dropped + probs[lo] <= 0.5 * WINDOW_TAIL {
        dropped += probs[lo];
        lo += 1;
    }
    let mut hi = probs.len() - 1;
    dropped = 0.0;
    while hi > lo && dropped + probs[hi] <= 0.5 * WINDOW_TAIL {
        dropped += probs[hi];
        hi -= 1;
    }
    let n_lo = initial.window.mode(lo);
    let n_hi = initial.window.mode(hi);
    let f_start = flux.at(tau_span.0);
    let (f_min, f_max) = flux.range(tau_span.0, tau_span.1);
    let up = (f_max - f_start).max(0.0).ceil() as i64;
    let down = (f_start - f_min).max(0.0).ceil() as i64;
    ModeWindow::new(n_lo - down - WINDOW_MARGIN, n_hi + up + WINDOW_MARGIN)
}

/// Dynamical phase factors `exp(sign * i * int_0^tau (n - f)^2)` applied mode by mode.
fn apply_dynamical_phase(s: &WaveState, flux: &FluxProgram, sign: f64) -> Vec<Complex64> {
    s.window
        .modes()
        .zip(&s.amps)
        .map(|(n, c)| c * Complex64::from_polar(1.0, sign * flux.phase_integral(n, s.tau)))
        .collect()
}

/// `a_n = c_n exp(+i int_0^tau (n - f)^2)`. States already in the interaction picture are returned unchanged.
pub fn to_interaction_picture(s: &WaveState, flux: FluxProgram) -> WaveState {
    match s.picture {
        Picture::Interaction => s.clone(),
        Picture::Direct => WaveState {
            tau: s.tau,
            window: s.window,
            amps: apply_dynamical_phase(s, &flux, 1.0),
            picture: Picture::Interaction,
        },
    }
}

/// Inverse of [`to_interaction_picture`].
pub fn from_interaction_picture(s: &WaveState, flux: FluxProgram) -> WaveState {
    match s.picture {
        Picture::Direct => s.clone(),
        Picture::Interaction => WaveState {
            tau: s.tau,
            window: s.window,
            amps: apply_dynamical_phase(s, &flux, -1.0),
            picture: Picture::Direct,
        },
    }
}

/// `psi(phi) = (2 pi)^{-1/2} sum_n c_n exp(i n phi)`.
pub fn reconstruct_wavefunction(s: &WaveState, phis: &[f64]) -> Result<Vec<Complex64>> {
    if s.picture != Picture::Direct {
        return Err(invalid(
            "wavefunction reconstruction needs a direct-picture state",
        ));
    }
    let norm = ring_normalization();
    Ok(phis
        .iter()
        .map(|&phi| {
            s.window
                .modes()
                .zip(&s.amps)
                .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * phi))
                .sum::<Complex64>()
                * norm
        })
        .collect())
}

/// `n_phi` angles uniformly covering `[0, 2 pi)`.
pub fn angle_grid(n_phi: usize) -> Vec<f64> {
    (0..n_phi)
        .map(|k| 2.0 * PI * k as f64 / n_phi as f64)
        .collect()
}

/// Sum of `coef * x^power * exp(i freq x)`.
#[derive(Clone, Debug, Default)]
struct ExpPoly {
    terms: Vec<(Complex64, u32, f64)>,
}

const RESONANCE: f64 = 1e-12;

impl ExpPoly {
    fn constant(c: Complex64) -> Self {
        Self {
            terms: vec![(c, 0, 0.0)],
        }
    }

    fn push(&mut self, coef: Complex64, power: u32, freq: f64) {
        if coef == Complex64::default() {
            return;
        }
        let freq = if freq.abs() < RESONANCE { 0.0 } else { freq };
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| t.1 == power && (t.2 - freq).abs() < RESONANCE)
        {
            t.0 += coef;
        } else {
            self.terms.push((coef, power, freq));
        }
    }

    /// `int_0^x self(xi) exp(i omega xi) d xi`, exactly.
    fn integrate_against(&self, omega: f64) -> Self {
        let mut out = Self::default();
        let i = Complex64::new(0.0, 1.0);
        for &(coef, k, freq) in &self.terms {
            let nu = freq + omega;
            if nu.abs() < RESONANCE {
                out.push(coef / (k + 1) as f64, k + 1, 0.0);
                continue;
            }
            let inu = i * nu;
            // int_0^x xi^k e^{i nu xi} = sum_j (-1)^j k!/(k-j)! x^{k-j} e^{i nu x} / (i nu)^{j+1} - (-1)^k k! / (i nu)^{k+1}
            let mut falling = 1.0;
            let mut denom = inu;
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out.push(coef * (sign * falling) / denom, k - j, nu);
                falling *= (k - j) as f64;
                denom *= inu;
            }
            let fact: f64 = (1..=k).map(|m| m as f64).product();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out.push(-coef * (sign * fact) / inu.powu(k + 1), 0, 0.0);
        }
        out
    }

    fn scale(&mut self, s: Complex64) {
        self.terms.iter_mut().for_each(|t| t.0 *= s);
    }

    fn eval(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(c, k, freq)| c * x.powi(k as i32) * Complex64::from_polar(1.0, freq * x))
            .sum()
    }
}

/// Closed-form amplitudes for the one-way chain (only `u_{+1} = S1 = 2 v0`) at static flux `f`.
///
/// Starting from `c_n(0) = delta_{n, n0}`, the amplitudes with the free dynamical
/// phase removed obey
/// `c_n(tau) = -i S1 int_0^tau c_{n-1}(xi) exp(i (2n - 2f - 1) xi) d xi`; each
/// level is a finite sum of `xi^k exp(i w xi)` terms, integrated exactly.
///
/// Returns `table[k][n - n0]` for `n0 <= n <= n_top` at `taus[k]`
/// (interaction picture for static flux).
pub fn triangular_oracle(
    v0: f64,
    f: f64,
    n0: i64,
    taus: &[f64],
    n_top: i64,
) -> Vec<Vec<Complex64>> {
    let s1 = 2.0 * v0;
    let levels = (n_top - n0).max(0) as usize + 1;
    let mut polys = Vec::with_capacity(levels);
    polys.push(ExpPoly::constant(Complex64::new(1.0, 0.0)));
    for l in 1..levels {
        let n = (n0 + l as i64) as f64;
        let omega = 2.0 * n - 2.0 * f - 1.0;
        let mut next = polys[l - 1].integrate_against(omega);
        next.scale(Complex64::new(0.0, -s1));
        polys.push(next);
    }
    taus.iter()
        .map(|&t| polys.iter().map(|p| p.eval(t)).collect())
        .collect()
}

/// Dynamical phase `(n - f)^2 tau` of mode `n` at static flux.
pub fn static_phase(n: i64, f: f64, tau: f64) -> f64 {
    free_energy(n, f) * tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_reference_potential;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn oracle_resonant_growth_and_initial_condition() {
        let taus = [0.0, 1.0, 7.5];
        let table = triangular_oracle(0.02, 0.5, 0, &taus, 3);
        assert_eq!(
            table[0],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        for (k, &t) in taus.iter().enumerate() {
            assert!((table[k][1] - c(0.0, -0.04 * t)).norm() < 1e-15);
        }
    }

    #[test]
    fn oracle_off_resonance_is_bounded() {
        let taus: Vec<f64> = (0..50).map(|k| k as f64 * 0.37).collect();
        let table = triangular_oracle(0.02, 0.0, 0, &taus, 1);
        for (row, &t) in table.iter().zip(&taus) {
            let expected = 0.04 * (2.0 * (t / 2.0).sin()).abs();
            assert!((row[1].norm() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_second_order_matches_quadrature() {
        // c_2 = -i S1 int_0^tau c_1(xi) e^{i w2 xi}, checked with composite Simpson on the closed-form c_1.
        let (v0, f, tau) = (0.02, 0.3, 9.0);
        let s1 = 2.0 * v0;
        let w1 = 1.0 - 2.0 * f;
        let w2 = 3.0 - 2.0 * f;
        let c1 = |x: f64| c(0.0, -s1) * (Complex64::from_polar(1.0, w1 * x) - 1.0) / c(0.0, w1);
        let m = 4000;
        let h = tau / m as f64;
        let mut acc = Complex64::default();
        for k in 0..=m {
            let x = k as f64 * h;
            let w = if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += c1(x) * Complex64::from_polar(1.0, w2 * x) * w;
        }
        let c2 = c(0.0, -s1) * acc * (h / 3.0);
        let table = triangular_oracle(v0, f, 0, &[tau], 2);
        let err = (table[0][2] - c2).norm() / c2.norm();
        assert!(err < 1e-10, "relative error {err:e}");
    }

    #[test]
    fn free_evolution_keeps_moduli() {
        let w = ModeWindow::symmetric(5).unwrap();
        let init = WaveState::from_fn(w, |n| c(1.0 / (1.0 + n as f64 * n as f64), 0.3 * n as f64))
            .normalized();
        let traj = evolve(
            &RingPotential::zero(),
            FluxProgram::Ramp {
                sigma: 0.01,
                tau0: 0.0,
            },
            w,
            &init,
            (0.0, 200.0),
            &PropagatorConfig {
                rtol: 1e-12,
                atol: 1e-15,
                boundary_guard: 0.99,
                ..Default::default()
            },
        )
        .unwrap();
        for s in &traj.states {
            for (a, b) in s.amps.iter().zip(&init.amps) {
                assert!(
                    (a.norm() - b.norm()).abs() < 1e-9,
                    "{} vs {} at {}",
                    a.norm(),
                    b.norm(),
                    s.tau
                );
            }
        }
        // direct picture phases: c_n(tau) = c_n(0) exp(-i Phi_n)
        let last = traj.last();
        let back = to_interaction_picture(
            last,
            FluxProgram::Ramp {
                sigma: 0.01,
                tau0: 0.0,
            },
        );
        for (a, b) in back.amps.iter().zip(&init.amps) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn boundary_guard_trips_on_narrow_window() {
        let p = make_reference_potential(0.08, 0.0).unwrap();
        let w = ModeWindow::new(-2, 3).unwrap();
        let init = WaveState::delta(w, 0).unwrap();
        let r = evolve(
            &p,
            FluxProgram::Ramp {
                sigma: 0.003,
                tau0: 0.0,
            },
            w,
            &init,
            (0.0, 1500.0),
            &PropagatorConfig::default(),
        );
        assert!(
            matches!(r, Err(Error::BoundaryMassExceeded { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn evolve_rejects_mismatched_inputs() {
        let p = RingPotential::zero();
        let w = ModeWindow::symmetric(3).unwrap();
        let init = WaveState::delta(ModeWindow::symmetric(4).unwrap(), 0).unwrap();
        let flux = FluxProgram::Static { f0: 0.0 };
        assert!(evolve(&p, flux, w, &init, (0.0, 1.0), &PropagatorConfig::default()).is_err());
        let init = WaveState::delta(w, 0).unwrap();
        assert!(evolve(&p, flux, w, &init, (1.0, 2.0), &PropagatorConfig::default()).is_err());
        let bad = PropagatorConfig {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(evolve(&p, flux, w, &init, (0.0, 1.0), &bad).is_err());
    }

    #[test]
    fn picture_round_trip() {
        let w = ModeWindow::new(-3, 4).unwrap();
        let mut s = WaveState::from_fn(w, |n| c(n as f64 * 0.1, 1.0 - 0.05 * n as f64));
        s.tau = 123.4;
        let flux = FluxProgram::Ramp {
            sigma: -0.003,
            tau0: -966.67,
        };
        let a = to_interaction_picture(&s, flux);
        assert_eq!(a.picture, Picture::Interaction);
        let back = from_interaction_picture(&a, flux);
        for ((x, y), z) in back.amps.iter().zip(&s.amps).zip(&a.amps) {
            assert!((x - y).norm() < 1e-14);
            assert!((z.norm() - y.norm()).abs() < 1e-14);
        }
        let st = FluxProgram::Static { f0: 0.2 };
        let a = to_interaction_picture(&s, st);
        for (n, (x, y)) in w.modes().zip(a.amps.iter().zip(&s.amps)) {
            let expected = y * Complex64::from_polar(1.0, static_phase(n, 0.2, 123.4));
            assert!((x - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn wavefunctions() {
        let w = ModeWindow::symmetric(3).unwrap();
        let phis = angle_grid(16);
        let psi = reconstruct_wavefunction(&WaveState::delta(w, 0).unwrap(), &phis).unwrap();
        let flat = (2.0 * PI).sqrt().recip();
        assert!(psi.iter().all(|z| (z - c(flat, 0.0)).norm() < 1e-15));

        let psi = reconstruct_wavefunction(&WaveState::delta(w, 1).unwrap(), &phis).unwrap();
        for (phi, z) in phis.iter().zip(&psi) {
            assert!((z.norm_sqr() - 1.0 / (2.0 * PI)).abs() < 1e-15);
            assert!((z - Complex64::from_polar(flat, *phi)).norm() < 1e-14);
        }

        let mut s = WaveState::delta(w, 0).unwrap();
        s.picture = Picture::Interaction;
        assert!(reconstruct_wavefunction(&s, &phis).is_err());
    }

    #[test]
    fn auto_window_follows_flux_direction() {
        let wide = ModeWindow::symmetric(30).unwrap();
        let init = WaveState::delta(wide, 0).unwrap();
        let up = auto_window(
            &init,
            FluxProgram::Ramp {
                sigma: 0.003,
                tau0: 0.0,
            },
            (0.0, 2000.0),
        )
        .unwrap();
        assert_eq!((up.n_min(), up.n_max()), (-4, 10));
        let down = auto_window(
            &init,
            FluxProgram::Ramp {
                sigma: -0.003,
                tau0: 0.0,
            },
            (0.0, 2000.0),
        )
        .unwrap();
        assert_eq!((down.n_min(), down.n_max()), (-10, 4));
        let fixed = auto_window(&init, FluxProgram::Static { f0: 0.5 }, (0.0, 50.0)).unwrap();
        assert_eq!((fixed.n_min(), fixed.n_max()), (-4, 4));
    }

    #[test]
    fn trajectory_csv_layout() {
        let w = ModeWindow::symmetric(1).unwrap();
        let init = WaveState::delta(w, 0).unwrap();
        let traj = evolve_sampled(
            &RingPotential::zero(),
            FluxProgram::Static { f0: 0.0 },
            w,
            &init,
            &[0.0, 1.0],
            &PropagatorConfig {
                boundary_guard: 0.9,
                ..Default::default()
            },
        )
        .unwrap();
        let mut out = Vec::new();
        traj.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,n,re_c,im_c,abs2"));
        assert_eq!(lines.next(), Some("0,-1,0,0,0"));
        assert_eq!(lines.next(), Some("0,0,1,0,1"));
        let mut out = Vec::new();
        traj.write_wavefunction_csv(&mut out, &[0.0]).unwrap();
        assert!(String::from_utf8(out)
            .unwrap()
            .starts_with("tau,phi,re_psi,im_psi,abs2\n0,0,"));
    }
}
