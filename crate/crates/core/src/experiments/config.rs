use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::{auto_window, PropagatorConfig, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::model::{FluxProgram, ModeWindow, Picture, RingPotential, WaveState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `u_{+1} = v0 (1 + alpha)`, `u_{-1} = v0 (1 - alpha)`.
    Reference {
        v0: f64,
        alpha: f64,
    },
    Coeffs {
        coeffs: Vec<HarmonicEntry>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicEntry {
    pub q: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<RingPotential> {
        match self {
            PotentialSpec::Reference { v0, alpha } => RingPotential::reference(*v0, *alpha),
            PotentialSpec::Coeffs { coeffs } => {
                if coeffs
                    .iter()
                    .any(|c| !(c.re.is_finite() && c.im.is_finite()))
                {
                    return Err(Error::Config(
                        "potential coefficients must be finite".into(),
                    ));
                }
                let mut seen = BTreeMap::new();
                for c in coeffs {
                    if seen.insert(c.q, ()).is_some() {
                        return Err(Error::Config(format!("harmonic q = {} listed twice", c.q)));
                    }
                }
                Ok(RingPotential::from_coeffs(
                    coeffs.iter().map(|c| (c.q, Complex64::new(c.re, c.im))),
                ))
            }
        }
    }
}

/// `"auto"` or an explicit `{ "n_min": .., "n_max": .. }`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum WindowSpec {
    #[default]
    Auto,
    Fixed(ModeWindow),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WindowRepr {
    Name(String),
    Fixed { n_min: i64, n_max: i64 },
}

impl Serialize for WindowSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WindowSpec::Auto => WindowRepr::Name("auto".into()).serialize(s),
            WindowSpec::Fixed(w) => WindowRepr::Fixed {
                n_min: w.n_min(),
                n_max: w.n_max(),
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for WindowSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match WindowRepr::deserialize(d)? {
            WindowRepr::Name(s) if s == "auto" => Ok(WindowSpec::Auto),
            WindowRepr::Name(s) => Err(D::Error::custom(format!(
                "unknown window '{s}', expected \"auto\""
            ))),
            WindowRepr::Fixed { n_min, n_max } => ModeWindow::new(n_min, n_max)
                .map(WindowSpec::Fixed)
                .map_err(D::Error::custom),
        }
    }
}

impl std::str::FromStr for WindowSpec {
    type Err = Error;

    /// `auto` or `N_MIN:N_MAX`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(WindowSpec::Auto);
        }
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("window '{s}' is not 'auto' or N_MIN:N_MAX")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|e| Error::Config(format!("window bound '{x}': {e}")))
        };
        Ok(WindowSpec::Fixed(ModeWindow::new(parse(a)?, parse(b)?)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Delta {
        n0: i64,
    },
    /// `c_n ∝ exp(-(n - center)^2 / width)`, normalized.
    Gaussian {
        center: f64,
        width: f64,
    },
    Explicit {
        amps: Vec<ModeAmplitude>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAmplitude {
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Gaussian amplitudes below this fraction of the peak are dropped.
const GAUSSIAN_CUTOFF: f64 = 1e-17;

impl InitialSpec {
    /// Support of the state before any window is imposed.
    pub fn support(&self) -> Result<ModeWindow> {
        match *self {
            InitialSpec::Delta { n0 } => ModeWindow::new(n0 - 1, n0 + 1),
            InitialSpec::Gaussian { center, width } => {
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(Error::Config(
                        "gaussian needs a finite center and a positive width".into(),
                    ));
                }
                let half = (width * -GAUSSIAN_CUTOFF.ln()).sqrt();
                ModeWindow::new(
                    (center - half).floor() as i64,
                    (center + half).ceil() as i64,
                )
            }
            InitialSpec::Explicit { ref amps } => {
                if amps.is_empty() {
                    return Err(Error::Config(
                        "explicit initial state has no amplitudes".into(),
                    ));
                }
                let lo = amps.iter().map(|a| a.n).min().unwrap();
                let hi = amps.iter().map(|a| a.n).max().unwrap();
                ModeWindow::new(lo, hi.max(lo + ModeWindow::MIN_SIZE as i64 - 1))
            }
        }
    }

    fn amplitude(&self, n: i64) -> Complex64 {
        match *self {
            InitialSpec::Delta { n0 } => Complex64::new(if n == n0 { 1.0 } else { 0.0 }, 0.0),
            InitialSpec::Gaussian { center, width } => {
                let x = n as f64 - center;
                let v = (-x * x / width).exp();
                Complex64::new(if v < GAUSSIAN_CUTOFF { 0.0 } else { v }, 0.0)
            }
            InitialSpec::Explicit { ref amps } => amps
                .iter()
                .find(|a| a.n == n)
                .map(|a| Complex64::new(a.re, a.im))
                .unwrap_or_default(),
        }
    }

    /// Direct-picture state at `tau` on `window`. Gaussians are normalized.
    pub fn state(&self, tau: f64, window: ModeWindow) -> Result<WaveState> {
        let mut s = WaveState::from_fn(window, |n| self.amplitude(n));
        s.tau = tau;
        s.picture = Picture::Direct;
        if s.norm_sqr() == 0.0 {
            return Err(Error::Config(
                "initial state vanishes on the chosen window".into(),
            ));
        }
        if let InitialSpec::Gaussian { .. } = self {
            s = s.normalized();
        }
        Ok(s)
    }
}

/// Artifacts a command may write; an empty list selects all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Trajectory,
    Wavefunction,
    Norms,
    Bands,
    ExceptionalPoints,
    Diabatic,
    Adiabatic,
    Overlap,
    LzScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSettings {
    pub n_f: usize,
    pub f_search: [f64; 2],
    pub gap_tol: f64,
    pub vec_tol: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            n_f: 101,
            f_search: [-0.5, 0.5],
            gap_tol: 1e-6,
            vec_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransparencySettings {
    /// Occupations are negligible for `n <= m_cutoff` at `tau = 0`.
    pub m_cutoff: i64,
    pub t_target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LzScanSettings {
    pub sigmas: Vec<f64>,
    pub v0s: Vec<f64>,
    #[serde(default)]
    pub alpha: f64,
    /// Lower level of the crossing pair.
    #[serde(default)]
    pub n: i64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_n_phi() -> usize {
    128
}

/// One experiment description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxProgram>,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_span: Option<[f64; 2]>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Angular samples for real-space output.
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub outputs: Vec<Artifact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transparency: Option<TransparencySettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lz_scan: Option<LzScanSettings>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: None,
            flux: None,
            window: WindowSpec::Auto,
            initial: None,
            tau_span: None,
            samples: DEFAULT_SAMPLES,
            n_phi: default_n_phi(),
            propagator: PropagatorConfig::default(),
            outputs: vec![],
            spectrum: None,
            transparency: None,
            lz_scan: None,
        }
    }
}

/// Window used by spectral commands when none is given.
pub const DEFAULT_SPECTRUM_WINDOW: (i64, i64) = (-16, 16);

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn wants(&self, a: Artifact) -> bool {
        self.outputs.is_empty() || self.outputs.contains(&a)
    }

    pub fn potential(&self) -> Result<RingPotential> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::Config("config needs a 'potential' section".into()))?
            .build()
    }

    pub fn flux(&self) -> Result<FluxProgram> {
        let flux = self
            .flux
            .ok_or_else(|| Error::Config("config needs a 'flux' section".into()))?;
        flux.validate()?;
        Ok(flux)
    }

    pub fn tau_span(&self) -> Result<(f64, f64)> {
        let [a, b] = self
            .tau_span
            .ok_or_else(|| Error::Config("config needs 'tau_span'".into()))?;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Config(format!(
                "tau_span [{a}, {b}] must be finite and increasing"
            )));
        }
        Ok((a, b))
    }

    pub fn initial(&self) -> Result<&InitialSpec> {
        self.initial
            .as_ref()
            .ok_or_else(|| Error::Config("config needs an 'initial' section".into()))
    }

    pub fn spectrum_window(&self) -> Result<ModeWindow> {
        match self.window {
            WindowSpec::Fixed(w) => Ok(w),
            WindowSpec::Auto => {
                ModeWindow::new(DEFAULT_SPECTRUM_WINDOW.0, DEFAULT_SPECTRUM_WINDOW.1)
            }
        }
    }

    /// Propagation window and the initial state placed on it.
    pub fn initial_state(&self, flux: FluxProgram, tau_span: (f64, f64)) -> Result<WaveState> {
        let init = self.initial()?;
        let window = match self.window {
            WindowSpec::Fixed(w) => w,
            WindowSpec::Auto => {
                let seed = init.state(tau_span.0, init.support()?)?;
                auto_window(&seed, flux, tau_span)?
            }
        };
        init.state(tau_span.0, window)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if self.n_phi == 0 {
            return Err(Error::Config("n_phi must be positive".into()));
        }
        self.propagator.validate()
    }
}
