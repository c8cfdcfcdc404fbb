//! Ring model: potentials, flux programs, mode windows and wave states.
//!
//! Everything here is dimensionless. Energies are measured in
//! `eps0 = hbar^2 / (2 m R^2)` and time in `tau = hbar t / (2 m R^2)`. A potential
//! `V(phi) = sum_q V_q exp(i q phi)` is stored as `u_q = V_q / eps0`, so the
//! cosine/sine reference family `V0 cos(phi) + i alpha V0 sin(phi)` with
//! `v0 = V0 m R^2 / hbar^2` has `u_{+1} = v0 (1 + alpha)` and
//! `u_{-1} = v0 (1 - alpha)`. These are the nearest-neighbour couplings
//! `S1`, `S2` of the winding-number chain.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Parameters of the reference family `v0 cos(phi) + i alpha v0 sin(phi)` (times 2, see module docs).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub v0: f64,
    pub alpha: f64,
}

/// Fourier data of a dimensionless complex ring potential. Only nonzero harmonics are stored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RingPotential {
    coeffs: BTreeMap<i64, Complex64>,
    descriptor: Option<ReferenceProfile>,
}

impl RingPotential {
    /// The zero potential (free particle).
    pub fn zero() -> Self {
        Self::default()
    }

    /// Reference family with `u_{+1} = v0 (1 + alpha)` and `u_{-1} = v0 (1 - alpha)`.
    pub fn reference(v0: f64, alpha: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 >= 0.0) {
            return Err(invalid(format!("v0 must be finite and >= 0, got {v0}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        let mut p = Self::from_coeffs([
            (1, Complex64::new(v0 * (1.0 + alpha), 0.0)),
            (-1, Complex64::new(v0 * (1.0 - alpha), 0.0)),
        ]);
        p.descriptor = Some(ReferenceProfile { v0, alpha });
        Ok(p)
    }

    /// Build from explicit `(q, u_q)` pairs. Zero amplitudes are dropped, repeated harmonics add up.
    pub fn from_coeffs(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (q, u) in pairs {
            *coeffs.entry(q).or_insert(Complex64::new(0.0, 0.0)) += u;
        }
        coeffs.retain(|_, u: &mut Complex64| *u != Complex64::new(0.0, 0.0));
        Self {
            coeffs,
            descriptor: None,
        }
    }

    pub fn descriptor(&self) -> Option<ReferenceProfile> {
        self.descriptor
    }

    /// Amplitude `u_q` (zero when absent).
    pub fn coeff(&self, q: i64) -> Complex64 {
        self.coeffs.get(&q).copied().unwrap_or_default()
    }

    /// Nonzero harmonics in ascending `q`.
    pub fn harmonics(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&q, &u)| (q, u))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Forward coupling `S1 = u_{+1}` (feeds `n` from `n - 1`).
    pub fn s1(&self) -> Complex64 {
        self.coeff(1)
    }

    /// Backward coupling `S2 = u_{-1}` (feeds `n` from `n + 1`).
    pub fn s2(&self) -> Complex64 {
        self.coeff(-1)
    }

    /// Largest `|u_q|`, used for matrix norm estimates.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|u| u.norm()).fold(0.0, f64::max)
    }

    /// PT symmetry `V(-phi) = V*(phi)` holds iff every `u_q` is real.
    pub fn is_pt_symmetric(&self, tol: f64) -> bool {
        self.coeffs.values().all(|u| u.im.abs() <= tol)
    }

    /// `V(phi) / eps0` at each angle.
    pub fn sample(&self, phis: &[f64]) -> Vec<Complex64> {
        phis.iter()
            .map(|&phi| {
                self.harmonics()
                    .map(|(q, u)| u * Complex64::from_polar(1.0, q as f64 * phi))
                    .sum()
            })
            .collect()
    }
}

pub fn make_reference_potential(v0: f64, alpha: f64) -> Result<RingPotential> {
    RingPotential::reference(v0, alpha)
}

/// Free-particle energy `(n - f)^2` in units of `eps0`.
pub fn free_energy(n: i64, f: f64) -> f64 {
    let d = n as f64 - f;
    d * d
}

pub fn is_pt_symmetric(p: &RingPotential, tol: f64) -> bool {
    p.is_pt_symmetric(tol)
}

pub fn sample_potential(p: &RingPotential, phis: &[f64]) -> Vec<Complex64> {
    p.sample(phis)
}

/// Normalized flux `f(tau)` threading the ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FluxProgram {
    Static {
        f0: f64,
    },
    /// `f(tau) = sigma (tau - tau0)`.
    Ramp {
        sigma: f64,
        tau0: f64,
    },
}

impl FluxProgram {
    pub fn ramp(sigma: f64, tau0: f64) -> Result<Self> {
        let p = FluxProgram::Ramp { sigma, tau0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FluxProgram::Static { f0 } if !f0.is_finite() => {
                Err(invalid("static flux must be finite"))
            }
            FluxProgram::Ramp { sigma, tau0 } => {
                if !(sigma.is_finite() && sigma != 0.0) {
                    Err(invalid(format!(
                        "ramp rate sigma must be finite and nonzero, got {sigma}"
                    )))
                } else if !tau0.is_finite() {
                    Err(invalid("ramp origin tau0 must be finite"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn at(&self, tau: f64) -> f64 {
        match *self {
            FluxProgram::Static { f0 } => f0,
            FluxProgram::Ramp { sigma, tau0 } => sigma * (tau - tau0),
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            FluxProgram::Static { .. } => None,
            FluxProgram::Ramp { sigma, .. } => Some(sigma),
        }
    }

    /// Dynamical phase `int_0^tau (n - f(t))^2 dt`, in closed form.
    pub fn phase_integral(&self, n: i64, tau: f64) -> f64 {
        match *self {
            FluxProgram::Static { f0 } => free_energy(n, f0) * tau,
            FluxProgram::Ramp { sigma, tau0 } => {
                // (a - sigma t)^2 with a = n + sigma tau0
                let a = n as f64 + sigma * tau0;
                a * a * tau - a * sigma * tau * tau + sigma * sigma * tau * tau * tau / 3.0
            }
        }
    }

    /// Range of `f` over `[t0, t1]`.
    pub fn range(&self, t0: f64, t1: f64) -> (f64, f64) {
        let (a, b) = (self.at(t0), self.at(t1));
        (a.min(b), a.max(b))
    }
}

/// Inclusive range of retained winding numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeWindow {
    n_min: i64,
    n_max: i64,
}

impl ModeWindow {
    pub const MIN_SIZE: usize = 3;

    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_max < n_min || ((n_max - n_min + 1) as usize) < Self::MIN_SIZE {
            return Err(invalid(format!(
                "mode window [{n_min}, {n_max}] must hold at least {} modes",
                Self::MIN_SIZE
            )));
        }
        Ok(Self { n_min, n_max })
    }

    /// `[-half, half]`.
    pub fn symmetric(half: i64) -> Result<Self> {
        Self::new(-half, half)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_min) as usize)
    }

    pub fn mode(&self, index: usize) -> i64 {
        self.n_min + index as i64
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + Clone {
        self.n_min..=self.n_max
    }

    /// Window reflected through `n = 0`.
    pub fn mirrored(&self) -> Self {
        Self {
            n_min: -self.n_max,
            n_max: -self.n_min,
        }
    }

    /// Same center, twice the half-width (rounded up).
    pub fn doubled(&self) -> Self {
        let extra = (self.len() as i64 + 1) / 2;
        Self {
            n_min: self.n_min - extra,
            n_max: self.n_max + extra,
        }
    }
}

impl Default for ModeWindow {
    fn default() -> Self {
        Self {
            n_min: -16,
            n_max: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    Direct,
    Interaction,
}

/// Truncated momentum-space state: `amps[i]` is the amplitude of winding number `window.mode(i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub tau: f64,
    pub window: ModeWindow,
    pub amps: Vec<Complex64>,
    pub picture: Picture,
}

impl WaveState {
    pub fn new(
        tau: f64,
        window: ModeWindow,
        amps: Vec<Complex64>,
        picture: Picture,
    ) -> Result<Self> {
        if amps.len() != window.len() {
            return Err(Error::Mismatch(format!(
                "{} amplitudes for a window of {} modes",
                amps.len(),
                window.len()
            )));
        }
        Ok(Self {
            tau,
            window,
            amps,
            picture,
        })
    }

    /// `c_n = delta_{n, n0}` at `tau = 0`, direct picture.
    pub fn delta(window: ModeWindow, n0: i64) -> Result<Self> {
        let idx = window
            .index_of(n0)
            .ok_or_else(|| invalid(format!("initial mode {n0} outside window")))?;
        let mut amps = vec![Complex64::new(0.0, 0.0); window.len()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self {
            tau: 0.0,
            window,
            amps,
            picture: Picture::Direct,
        })
    }

    /// Direct-picture state at `tau = 0` with `c_n = amp(n)`.
    pub fn from_fn(window: ModeWindow, amp: impl Fn(i64) -> Complex64) -> Self {
        Self {
            tau: 0.0,
            window,
            amps: window.modes().map(amp).collect(),
            picture: Picture::Direct,
        }
    }

    pub fn amp(&self, n: i64) -> Complex64 {
        self.window
            .index_of(n)
            .map(|i| self.amps[i])
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `sum n |c_n|^2 / sum |c_n|^2`.
    pub fn mean_winding(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        self.window
            .modes()
            .zip(&self.amps)
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum::<f64>()
            / total
    }

    /// Scale to unit norm. Zero states are left alone.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.amps.iter_mut().for_each(|c| *c /= norm);
        }
        self
    }

    /// Fraction of the probability held by the outermost `k` modes on each edge.
    pub fn edge_fraction(&self, k: usize) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let len = self.amps.len();
        let k = k.min(len / 2);
        let edge: f64 = self.amps[..k]
            .iter()
            .chain(&self.amps[len - k..])
            .map(|c| c.norm_sqr())
            .sum();
        edge / total
    }

    /// Re-express on another window; modes outside the new window are dropped.
    pub fn rewindowed(&self, window: ModeWindow) -> Self {
        Self {
            tau: self.tau,
            window,
            amps: window.modes().map(|n| self.amp(n)).collect(),
            picture: self.picture,
        }
    }
}

/// `(2 pi)^{-1/2}`, the normalization of the angular-momentum eigenfunctions.
pub(crate) fn ring_normalization() -> f64 {
    (2.0 * PI).sqrt().recip()
}
