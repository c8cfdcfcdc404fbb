//! Landau–Zener layer for the ramped-flux chain.
//!
//! With `f = sigma tau`, diabatic levels `n` and `n + 1` cross at
//! `tau_n = (2n + 1) / (2 sigma)`. Below the PT-breaking point the chain with
//! couplings `(S1, S2)` is diagonally similar to a Hermitian chain with
//! `S = sqrt(S1 S2)`, which gives the transfer probability, the gauge map and
//! the flux-reversal identity. At `alpha = 1` (`S2 = 0`) transitions only go
//! from `n - 1` to `n` and the asymptotic amplitudes are a cascade of jumps.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::model::{ModeWindow, Picture, WaveState};
use crate::ode::{Integrator, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LZEvent {
    pub n: i64,
    pub tau_n: f64,
    pub s_eff: f64,
    pub p_zener: f64,
}

/// Crossing time of diabatic levels `n` and `n + 1`.
pub fn crossing_time(n: i64, sigma: f64) -> f64 {
    (2 * n + 1) as f64 / (2.0 * sigma)
}

pub fn crossing_times(
    sigma: f64,
    n_range: RangeInclusive<i64>,
    s1: f64,
    s2: f64,
) -> Result<Vec<LZEvent>> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(invalid("crossing times need a nonzero ramp rate"));
    }
    let p_zener = lz_probability(s1, s2, sigma)?;
    let s_eff = (s1 * s2).sqrt();
    Ok(n_range
        .map(|n| LZEvent {
            n,
            tau_n: crossing_time(n, sigma),
            s_eff,
            p_zener,
        })
        .collect())
}

/// `P_Z = 1 - exp(-pi S1 S2 / |sigma|)`.
pub fn lz_probability(s1: f64, s2: f64, sigma: f64) -> Result<f64> {
    let s_sq = s1 * s2;
    if s_sq < 0.0 {
        return Err(invalid(format!(
            "S1 S2 = {s_sq} < 0: the two-level formula only holds below the PT-breaking point"
        )));
    }
    if sigma == 0.0 || sigma.is_nan() {
        return Err(invalid("ramp rate must be nonzero"));
    }
    Ok(-(-PI * s_sq / sigma.abs()).exp_m1())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeDirection {
    /// `a_n = c_n r^{-n/2}`.
    ToHermitian,
    /// `c_n = a_n r^{n/2}`.
    FromHermitian,
}

/// `r = (1 + alpha) / (1 - alpha)`.
pub fn gauge_ratio(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!(
            "gauge map needs 0 <= alpha < 1 (diverges at alpha = 1), got {alpha}"
        )));
    }
    Ok((1.0 + alpha) / (1.0 - alpha))
}

pub fn gauge_map(s: &WaveState, alpha: f64, direction: GaugeDirection) -> Result<WaveState> {
    let r = gauge_ratio(alpha)?;
    let sign = match direction {
        GaugeDirection::ToHermitian => -0.5,
        GaugeDirection::FromHermitian => 0.5,
    };
    let amps = s
        .window
        .modes()
        .zip(&s.amps)
        .map(|(n, c)| c * r.powf(sign * n as f64))
        .collect();
    Ok(WaveState {
        tau: s.tau,
        window: s.window,
        amps,
        picture: s.picture,
    })
}

/// Largest violation of `c_n(tau, -sigma) = c_{-n}(tau, sigma) r^n` over the
/// samples, ignoring entries where both sides are below `1e-10`.
pub fn asymmetry_residual(
    traj_plus: &Trajectory,
    traj_minus: &Trajectory,
    alpha: f64,
) -> Result<f64> {
    let r = gauge_ratio(alpha)?;
    if traj_plus.times != traj_minus.times {
        return Err(Error::Mismatch(
            "trajectories are sampled at different times".into(),
        ));
    }
    let (wp, wm) = (traj_plus.window(), traj_minus.window());
    if wm != wp.mirrored() {
        return Err(Error::Mismatch(format!(
            "windows {wp:?} and {wm:?} are not mirror images of each other"
        )));
    }
    let mut residual = 0.0f64;
    for (sp, sm) in traj_plus.states.iter().zip(&traj_minus.states) {
        if sp.picture != sm.picture {
            return Err(Error::Mismatch(
                "trajectories use different pictures".into(),
            ));
        }
        for n in wm.modes() {
            let lhs = sm.amp(n);
            let rhs = sp.amp(-n) * r.powi(n as i32);
            if lhs.norm().max(rhs.norm()) > 1e-10 {
                residual = residual.max((lhs - rhs).norm());
            }
        }
    }
    Ok(residual)
}

/// Asymptotic interaction-picture amplitudes on a window, one row per time.
#[derive(Clone, Debug)]
pub struct AmplitudeTable {
    pub window: ModeWindow,
    pub taus: Vec<f64>,
    /// `amps[k][window index]`.
    pub amps: Vec<Vec<Complex64>>,
}

impl AmplitudeTable {
    pub fn amp(&self, k: usize, n: i64) -> Complex64 {
        self.window
            .index_of(n)
            .map(|i| self.amps[k][i])
            .unwrap_or_default()
    }
}

/// Jump factor `-i S1 sqrt(pi / (i sigma)) exp(i sigma tau_{n-1}^2)` for the
/// transition into `n`, principal square root for either sign of `sigma`.
pub fn jump_factor(s1: f64, sigma: f64, n: i64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let root = (Complex64::new(PI, 0.0) / (i * sigma)).sqrt();
    let tc = crossing_time(n - 1, sigma);
    -i * s1 * root * Complex64::from_polar(1.0, sigma * tc * tc)
}

/// `|jump| = S1 sqrt(pi / |sigma|)`.
pub fn jump_magnitude(s1: f64, sigma: f64) -> f64 {
    s1 * (PI / sigma.abs()).sqrt()
}

/// Step-function cascade for the one-way chain (`alpha = 1`, `S1 = 2 v0`).
///
/// For `sigma > 0`, `a_n` for `n >= 1` jumps at `tau_{n-1}` by the jump factor
/// times `a_{n-1}` just after its own jump. For `sigma < 0`, `a_n` for `n <= 0`
/// jumps at `tau_{n-1}` by the jump factor times `a_{n-1}(0)`, the initial
/// amplitude. Times must be `>= 0` and must not coincide with a crossing.
pub fn asymptotic_amplitudes(
    v0: f64,
    sigma: f64,
    initial: &BTreeMap<i64, Complex64>,
    taus: &[f64],
) -> Result<AmplitudeTable> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(invalid("ramp rate must be nonzero"));
    }
    if initial.is_empty() {
        return Err(invalid("initial amplitude map is empty"));
    }
    let s1 = 2.0 * v0;
    let n_lo = *initial.keys().next().unwrap();
    let n_hi = *initial.keys().next_back().unwrap();
    let tau_max = taus.iter().copied().fold(0.0, f64::max);
    let upper = if sigma > 0.0 {
        // last n whose feeding crossing tau_{n-1} lies before tau_max
        let last_jump = (sigma * tau_max + 0.5).ceil() as i64;
        n_hi.max(last_jump)
    } else {
        n_hi.max((n_hi + 1).min(0))
    };
    let upper = upper.max(n_lo + ModeWindow::MIN_SIZE as i64 - 1);
    let window = ModeWindow::new(n_lo, upper)?;

    let jumps_into = |n: i64| if sigma > 0.0 { n >= 1 } else { n <= 0 };
    for &t in taus {
        if !(t >= 0.0) {
            return Err(invalid(format!(
                "asymptotic amplitudes need tau >= 0, got {t}"
            )));
        }
        for n in window.modes().filter(|&n| jumps_into(n)) {
            let tc = crossing_time(n - 1, sigma);
            if (t - tc).abs() <= 1e-12 * tc.abs().max(1.0) {
                return Err(invalid(format!(
                    "tau = {t} coincides with the crossing time of level {n}"
                )));
            }
        }
    }

    let a0: Vec<Complex64> = window
        .modes()
        .map(|n| initial.get(&n).copied().unwrap_or_default())
        .collect();
    // amplitude just after each level's own jump
    let mut after = a0.clone();
    if sigma > 0.0 {
        for (i, n) in window.modes().enumerate().skip(1) {
            if jumps_into(n) {
                after[i] = a0[i] + jump_factor(s1, sigma, n) * after[i - 1];
            }
        }
    }

    let amps = taus
        .iter()
        .map(|&t| {
            window
                .modes()
                .enumerate()
                .map(|(i, n)| {
                    if !jumps_into(n) || i == 0 || t < crossing_time(n - 1, sigma) {
                        return a0[i];
                    }
                    if sigma > 0.0 {
                        // a_{n-1} evaluated at tau_{n-1}, after its own (earlier) jump
                        a0[i] + jump_factor(s1, sigma, n) * after[i - 1]
                    } else {
                        a0[i] + jump_factor(s1, sigma, n) * a0[i - 1]
                    }
                })
                .collect()
        })
        .collect();
    Ok(AmplitudeTable {
        window,
        taus: taus.to_vec(),
        amps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransparencyPlan {
    /// Occupations vanish for `n <= m_cutoff`.
    pub m_cutoff: i64,
    pub sigma: f64,
    pub tau0: f64,
    /// Transparency onset `T = (2M + 1) / (2 sigma) + tau0`.
    pub t_onset: f64,
}

/// Ramp origin `tau0` that makes the potential invisible from `t_target` on.
pub fn plan_transparency(m_cutoff: i64, sigma: f64, t_target: f64) -> Result<TransparencyPlan> {
    if !(sigma < 0.0) || !sigma.is_finite() {
        return Err(invalid(format!(
            "delayed transparency needs sigma < 0 (the direction in which one-way tunnelling freezes), got {sigma}"
        )));
    }
    if !t_target.is_finite() {
        return Err(invalid("target delay must be finite"));
    }
    let tau0 = t_target - crossing_time(m_cutoff, sigma);
    Ok(TransparencyPlan {
        m_cutoff,
        sigma,
        tau0,
        t_onset: crossing_time(m_cutoff, sigma) + tau0,
    })
}

/// Tolerances for the isolated two-level integrations.
const TWO_LEVEL_TOL: Tolerances = Tolerances {
    rtol: 1e-11,
    atol: 1e-14,
    max_step: 5.0,
};

/// Integrate the isolated pair `(n, n + 1)` across `tau_n`, starting in level `n`.
///
/// `i dc_n/dtau = (n - sigma tau)^2 c_n + S2 c_{n+1}`,
/// `i dc_{n+1}/dtau = (n + 1 - sigma tau)^2 c_{n+1} + S1 c_n`.
/// The span must reach at least `20 / sqrt|sigma|` past the crossing on both sides.
pub fn two_level_lz(
    s1: f64,
    s2: f64,
    n: i64,
    sigma: f64,
    tau_span: (f64, f64),
) -> Result<[Complex64; 2]> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(invalid("ramp rate must be nonzero"));
    }
    let tc = crossing_time(n, sigma);
    let margin = 20.0 / sigma.abs().sqrt();
    let (t0, t1) = tau_span;
    if !(t0 <= tc - margin && t1 >= tc + margin) {
        return Err(invalid(format!(
            "span [{t0}, {t1}] must cover tau_n = {tc} with margin {margin} on both sides"
        )));
    }
    let (na, nb) = (n as f64, n as f64 + 1.0);
    let rhs = move |tau: f64, c: &[Complex64], dc: &mut [Complex64]| {
        let f = sigma * tau;
        let a = c[0] * (na - f).powi(2) + c[1] * s2;
        let b = c[1] * (nb - f).powi(2) + c[0] * s1;
        dc[0] = Complex64::new(a.im, -a.re);
        dc[1] = Complex64::new(b.im, -b.re);
    };
    let mut integ = Integrator::new(
        rhs,
        t0,
        vec![Complex64::new(1.0, 0.0), Complex64::default()],
        TWO_LEVEL_TOL,
    );
    integ.advance_to(t1, |_, _| Ok(()))?;
    let y = integ.state();
    Ok([y[0], y[1]])
}

/// Span half-width used for numeric transfer probabilities: wide enough that the
/// residual off-resonant admixture `S / (2 |sigma| margin)` is below `2.5e-3`.
pub fn two_level_margin(s_eff: f64, sigma: f64) -> f64 {
    (20.0 / sigma.abs().sqrt()).max(200.0 * s_eff / sigma.abs())
}

/// Numeric counterpart of [`lz_probability`]: transfer `n -> n + 1` in the
/// Hermitian gauge, `|c_{n+1}|^2 S2 / S1`.
pub fn numeric_transfer_probability(s1: f64, s2: f64, sigma: f64, n: i64) -> Result<f64> {
    if s1 * s2 < 0.0 {
        return Err(invalid("numeric transfer probability needs S1 S2 >= 0"));
    }
    if s1 == 0.0 || s2 == 0.0 {
        return Ok(0.0);
    }
    let tc = crossing_time(n, sigma);
    let margin = two_level_margin((s1 * s2).sqrt(), sigma);
    let [_, c_up] = two_level_lz(s1, s2, n, sigma, (tc - margin, tc + margin))?;
    Ok(c_up.norm_sqr() * s2 / s1)
}

/// Direct-picture state built from an amplitude table row, for comparisons with propagated trajectories.
pub fn table_state(table: &AmplitudeTable, k: usize) -> WaveState {
    WaveState {
        tau: table.taus[k],
        window: table.window,
        amps: table.amps[k].clone(),
        picture: Picture::Interaction,
    }
}
