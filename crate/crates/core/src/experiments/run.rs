use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Artifact, InitialSpec, RunConfig};
use crate::dynamics::{
    angle_grid, evolve_sampled, reconstruct_wavefunction, uniform_times, Trajectory,
};
use crate::error::{Error, Result};
use crate::lz::{
    crossing_time, lz_probability, numeric_transfer_probability, plan_transparency,
    TransparencyPlan,
};
use crate::model::{free_energy, FluxProgram, ModeWindow, RingPotential, WaveState};
use crate::spectrum::{
    band_sweep, locate_exceptional_points, spectra_on_grid, BandStructure, EPReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Evolve,
    Transparency,
    LzScan,
}

/// Named output files with their contents.
pub type Files = Vec<(String, Vec<u8>)>;

/// Record written next to the artifacts of every run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Command,
    pub version: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<ModeWindow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<TransparencyPlan>,
    pub wall_time_s: f64,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

// ---------------------------------------------------------------- spectrum

/// Instantaneous levels along a flux ramp.
#[derive(Clone, Debug)]
pub struct LevelDiagram {
    pub taus: Vec<f64>,
    pub fluxes: Vec<f64>,
    /// `(n - f(tau))^2` for every mode of the window.
    pub diabatic: Vec<Vec<f64>>,
    /// Sorted eigenvalues of `H(f(tau))`.
    pub adiabatic: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct SpectrumRun {
    pub window: ModeWindow,
    pub bands: BandStructure,
    pub eps: Vec<EPReport>,
    pub levels: Option<LevelDiagram>,
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<SpectrumRun> {
    cfg.validate()?;
    let p = cfg.potential()?;
    let window = cfg.spectrum_window()?;
    let settings = cfg.spectrum.clone().unwrap_or_default();
    let bands = band_sweep(&p, window, settings.n_f)?;
    let [a, b] = settings.f_search;
    let eps = locate_exceptional_points(&p, window, (a, b), settings.gap_tol, settings.vec_tol)?;
    let levels = match cfg.flux {
        Some(flux @ FluxProgram::Ramp { .. }) => Some(level_diagram(
            &p,
            flux,
            window,
            cfg.tau_span()?,
            cfg.samples,
        )?),
        _ => None,
    };
    Ok(SpectrumRun {
        window,
        bands,
        eps,
        levels,
    })
}

pub fn level_diagram(
    p: &RingPotential,
    flux: FluxProgram,
    window: ModeWindow,
    tau_span: (f64, f64),
    samples: usize,
) -> Result<LevelDiagram> {
    let taus = uniform_times(tau_span.0, tau_span.1, samples);
    let fluxes: Vec<f64> = taus.iter().map(|&t| flux.at(t)).collect();
    let diabatic = fluxes
        .iter()
        .map(|&f| window.modes().map(|n| free_energy(n, f)).collect())
        .collect();
    let adiabatic = spectra_on_grid(p, window, &fluxes)?;
    Ok(LevelDiagram {
        taus,
        fluxes,
        diabatic,
        adiabatic,
    })
}

impl SpectrumRun {
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("max_im".into(), self.bands.max_im);
        m.insert("flagged_points".into(), self.bands.flagged.len() as f64);
        m.insert("exceptional_points".into(), self.eps.len() as f64);
        if let Some(worst) = self
            .eps
            .iter()
            .map(|e| e.coalescence_metric)
            .reduce(f64::max)
        {
            m.insert("max_coalescence_metric".into(), worst);
        }
        m
    }

    pub fn files(&self, cfg: &RunConfig) -> Result<Files> {
        let mut files = Vec::new();
        if cfg.wants(Artifact::Bands) {
            files.push(("bands.csv".into(), csv(|w| self.bands.write_csv(w))?));
        }
        if cfg.wants(Artifact::ExceptionalPoints) {
            files.push((
                "exceptional_points.csv".into(),
                csv(|w| {
                    writeln!(w, "f_star,band_i,band_j,gap,coalescence_metric")?;
                    for e in &self.eps {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            e.f_star, e.pair.0, e.pair.1, e.gap, e.coalescence_metric
                        )?;
                    }
                    Ok(())
                })?,
            ));
        }
        if let Some(lv) = &self.levels {
            if cfg.wants(Artifact::Diabatic) {
                files.push((
                    "diabatic.csv".into(),
                    csv(|w| {
                        writeln!(w, "tau,f,n,E")?;
                        for (k, (t, f)) in lv.taus.iter().zip(&lv.fluxes).enumerate() {
                            for (n, e) in self.window.modes().zip(&lv.diabatic[k]) {
                                writeln!(w, "{t},{f},{n},{e}")?;
                            }
                        }
                        Ok(())
                    })?,
                ));
            }
            if cfg.wants(Artifact::Adiabatic) {
                files.push((
                    "adiabatic.csv".into(),
                    csv(|w| {
                        writeln!(w, "tau,f,level,re_E,im_E")?;
                        for (k, (t, f)) in lv.taus.iter().zip(&lv.fluxes).enumerate() {
                            for (level, e) in lv.adiabatic[k].iter().enumerate() {
                                writeln!(w, "{t},{f},{level},{},{}", e.re, e.im)?;
                            }
                        }
                        Ok(())
                    })?,
                ));
            }
        }
        Ok(files)
    }
}

// ---------------------------------------------------------------- evolve

#[derive(Clone, Debug)]
pub struct EvolveRun {
    pub flux: FluxProgram,
    pub trajectory: Trajectory,
    /// Initial winding number for delta starts.
    pub n0: Option<i64>,
}

pub fn run_evolve(cfg: &RunConfig) -> Result<EvolveRun> {
    cfg.validate()?;
    let p = cfg.potential()?;
    let flux = cfg.flux()?;
    let span = cfg.tau_span()?;
    let initial = cfg.initial_state(flux, span)?;
    let times = uniform_times(span.0, span.1, cfg.samples);
    let trajectory = evolve_sampled(&p, flux, initial.window, &initial, &times, &cfg.propagator)?;
    let n0 = match cfg.initial()? {
        InitialSpec::Delta { n0 } => Some(*n0),
        _ => None,
    };
    Ok(EvolveRun {
        flux,
        trajectory,
        n0,
    })
}

fn write_norms(w: &mut Vec<u8>, t: &Trajectory) -> Result<()> {
    writeln!(w, "tau,norm,mean_winding")?;
    for ((tau, norm), mw) in t.times.iter().zip(&t.norms).zip(&t.mean_winding) {
        writeln!(w, "{tau},{norm},{mw}")?;
    }
    Ok(())
}

/// Largest `|c_n|` over all samples and all modes other than `n0`.
pub fn max_off_initial(t: &Trajectory, n0: i64) -> f64 {
    t.states
        .iter()
        .flat_map(|s| {
            s.window
                .modes()
                .zip(&s.amps)
                .filter(move |(n, _)| *n != n0)
                .map(|(_, c)| c.norm())
        })
        .fold(0.0, f64::max)
}

impl EvolveRun {
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let t = &self.trajectory;
        let n_init = t.norms[0];
        let mut m = BTreeMap::new();
        m.insert("norm_initial".into(), n_init);
        m.insert("norm_final".into(), *t.norms.last().unwrap());
        m.insert(
            "max_norm_drift".into(),
            t.norms
                .iter()
                .map(|n| (n - n_init).abs())
                .fold(0.0, f64::max),
        );
        m.insert("max_boundary_fraction".into(), t.max_boundary_fraction);
        m.insert("mean_winding_final".into(), *t.mean_winding.last().unwrap());
        m.insert("steps".into(), t.steps as f64);
        if let Some(n0) = self.n0 {
            m.insert("max_abs_off_initial".into(), max_off_initial(t, n0));
        }
        m
    }

    pub fn files(&self, cfg: &RunConfig) -> Result<Files> {
        let mut files = Vec::new();
        let t = &self.trajectory;
        if cfg.wants(Artifact::Trajectory) {
            files.push(("trajectory.csv".into(), csv(|w| t.write_csv(w))?));
        }
        if cfg.wants(Artifact::Wavefunction) {
            let phis = angle_grid(cfg.n_phi);
            files.push((
                "wavefunction.csv".into(),
                csv(|w| t.write_wavefunction_csv(w, &phis))?,
            ));
        }
        if cfg.wants(Artifact::Norms) {
            files.push(("norms.csv".into(), csv(|w| write_norms(w, t))?));
        }
        Ok(files)
    }
}

// ---------------------------------------------------------------- transparency

#[derive(Clone, Debug)]
pub struct TransparencyRun {
    pub plan: TransparencyPlan,
    pub flux: FluxProgram,
    pub full: Trajectory,
    /// Same start, potential removed for `tau > T`.
    pub free: Trajectory,
    /// Largest change of any `|c_n|` after `T` in the full run.
    pub frozen_change: f64,
    /// `max |Re psi_full(0) - Re psi_free(0)|` over samples after `T`.
    pub psi_diff: f64,
    /// `max |Re psi_full(0)|` over the same samples.
    pub psi_peak: f64,
}

/// Free propagation of a direct-picture state from `s.tau` to `tau`.
fn free_step(s: &WaveState, flux: &FluxProgram, tau: f64) -> WaveState {
    let amps = s
        .window
        .modes()
        .zip(&s.amps)
        .map(|(n, c)| {
            c * Complex64::from_polar(
                1.0,
                -(flux.phase_integral(n, tau) - flux.phase_integral(n, s.tau)),
            )
        })
        .collect();
    WaveState {
        tau,
        window: s.window,
        amps,
        picture: s.picture,
    }
}

pub fn run_transparency(cfg: &RunConfig) -> Result<TransparencyRun> {
    cfg.validate()?;
    let settings = cfg
        .transparency
        .as_ref()
        .ok_or_else(|| Error::Config("config needs a 'transparency' section".into()))?;
    let sigma = cfg
        .flux()?
        .sigma()
        .ok_or_else(|| Error::Config("delayed transparency needs a ramped flux".into()))?;
    let plan = plan_transparency(settings.m_cutoff, sigma, settings.t_target)?;
    let flux = FluxProgram::ramp(sigma, plan.tau0)?;
    let p = cfg.potential()?;
    let span = cfg.tau_span()?;
    let t_on = plan.t_onset;
    if !(t_on > span.0 && t_on < span.1) {
        return Err(Error::Config(format!(
            "onset T = {t_on} must lie inside tau_span [{}, {}]",
            span.0, span.1
        )));
    }
    let mut times = uniform_times(span.0, span.1, cfg.samples);
    if !times.contains(&t_on) {
        times.push(t_on);
        times.sort_by(f64::total_cmp);
    }
    let k_on = times.iter().position(|&t| t == t_on).unwrap();

    let initial = cfg.initial_state(flux, span)?;
    let full = evolve_sampled(&p, flux, initial.window, &initial, &times, &cfg.propagator)?;

    let at_on = &full.states[k_on];
    let states: Vec<WaveState> = full
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k <= k_on {
                s.clone()
            } else {
                free_step(at_on, &flux, times[k])
            }
        })
        .collect();
    let free = Trajectory {
        times: times.clone(),
        norms: states.iter().map(WaveState::norm_sqr).collect(),
        mean_winding: states.iter().map(WaveState::mean_winding).collect(),
        states,
        max_boundary_fraction: full.max_boundary_fraction,
        steps: full.steps,
    };

    let mut frozen_change = 0.0f64;
    for s in &full.states[k_on..] {
        for (c, c_on) in s.amps.iter().zip(&at_on.amps) {
            frozen_change = frozen_change.max((c.norm() - c_on.norm()).abs());
        }
    }
    let (mut psi_diff, mut psi_peak) = (0.0f64, 0.0f64);
    for k in k_on..times.len() {
        let a = reconstruct_wavefunction(&full.states[k], &[0.0])?[0].re;
        let b = reconstruct_wavefunction(&free.states[k], &[0.0])?[0].re;
        psi_diff = psi_diff.max((a - b).abs());
        psi_peak = psi_peak.max(a.abs());
    }
    Ok(TransparencyRun {
        plan,
        flux,
        full,
        free,
        frozen_change,
        psi_diff,
        psi_peak,
    })
}

impl TransparencyRun {
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("tau0".into(), self.plan.tau0);
        m.insert("t_onset".into(), self.plan.t_onset);
        m.insert("frozen_change".into(), self.frozen_change);
        m.insert("psi0_max_difference".into(), self.psi_diff);
        m.insert("psi0_peak".into(), self.psi_peak);
        m.insert(
            "psi0_relative_difference".into(),
            self.psi_diff / self.psi_peak,
        );
        m.insert(
            "max_boundary_fraction".into(),
            self.full.max_boundary_fraction,
        );
        m.insert("norm_final".into(), *self.full.norms.last().unwrap());
        m.insert("steps".into(), self.full.steps as f64);
        m
    }

    pub fn files(&self, cfg: &RunConfig) -> Result<Files> {
        let mut files = Vec::new();
        let phis = angle_grid(cfg.n_phi);
        for (tag, t) in [("full", &self.full), ("free", &self.free)] {
            if cfg.wants(Artifact::Trajectory) {
                files.push((format!("trajectory_{tag}.csv"), csv(|w| t.write_csv(w))?));
            }
            if cfg.wants(Artifact::Wavefunction) {
                files.push((
                    format!("wavefunction_{tag}.csv"),
                    csv(|w| t.write_wavefunction_csv(w, &phis))?,
                ));
            }
            if cfg.wants(Artifact::Norms) {
                files.push((format!("norms_{tag}.csv"), csv(|w| write_norms(w, t))?));
            }
        }
        if cfg.wants(Artifact::Overlap) {
            files.push((
                "overlap.csv".into(),
                csv(|w| {
                    writeln!(w, "tau,re_psi_full,re_psi_free,difference")?;
                    for (a, b) in self.full.states.iter().zip(&self.free.states) {
                        let x = reconstruct_wavefunction(a, &[0.0])?[0].re;
                        let y = reconstruct_wavefunction(b, &[0.0])?[0].re;
                        writeln!(w, "{},{x},{y},{}", a.tau, x - y)?;
                    }
                    Ok(())
                })?,
            ));
        }
        Ok(files)
    }
}

// ---------------------------------------------------------------- lz scan

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LzScanRow {
    pub n: i64,
    pub tau_n: f64,
    pub p_zener: f64,
    pub p_numeric: f64,
    pub sigma: f64,
    pub v0: f64,
    pub alpha: f64,
    pub s_eff: f64,
}

#[derive(Clone, Debug)]
pub struct LzScanRun {
    pub rows: Vec<LzScanRow>,
}

pub fn run_lz_scan(cfg: &RunConfig) -> Result<LzScanRun> {
    let s = cfg
        .lz_scan
        .as_ref()
        .ok_or_else(|| Error::Config("config needs an 'lz_scan' section".into()))?;
    if s.sigmas.is_empty() || s.v0s.is_empty() {
        return Err(Error::Config(
            "lz_scan needs at least one sigma and one v0".into(),
        ));
    }
    let grid: Vec<(f64, f64)> = s
        .v0s
        .iter()
        .flat_map(|&v0| s.sigmas.iter().map(move |&sg| (v0, sg)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(v0, sigma)| {
            let (s1, s2) = (v0 * (1.0 + s.alpha), v0 * (1.0 - s.alpha));
            let p_zener = lz_probability(s1, s2, sigma)?;
            let p_numeric = numeric_transfer_probability(s1, s2, sigma, s.n)?;
            Ok(LzScanRow {
                n: s.n,
                tau_n: crossing_time(s.n, sigma),
                p_zener,
                p_numeric,
                sigma,
                v0,
                alpha: s.alpha,
                s_eff: (s1 * s2).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LzScanRun { rows })
}

impl LzScanRun {
    pub fn metrics(&self) -> BTreeMap<String, f64> {
        let worst = self
            .rows
            .iter()
            .filter(|r| r.p_zener > 0.0)
            .map(|r| (r.p_numeric - r.p_zener).abs() / r.p_zener)
            .fold(0.0, f64::max);
        BTreeMap::from([
            ("rows".into(), self.rows.len() as f64),
            ("max_relative_difference".into(), worst),
        ])
    }

    pub fn files(&self, cfg: &RunConfig) -> Result<Files> {
        if !cfg.wants(Artifact::LzScan) {
            return Ok(vec![]);
        }
        Ok(vec![(
            "lz_scan.csv".into(),
            csv(|w| {
                writeln!(w, "n,tau_n,p_zener,p_numeric,sigma,v0,alpha,s_eff")?;
                for r in &self.rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{}",
                        r.n, r.tau_n, r.p_zener, r.p_numeric, r.sigma, r.v0, r.alpha, r.s_eff
                    )?;
                }
                Ok(())
            })?,
        )])
    }
}

// ---------------------------------------------------------------- driver

/// Run a command, returning its manifest and output files without touching the disk.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<(RunManifest, Files)> {
    let start = Instant::now();
    let (metrics, files, window, plan) = match cmd {
        Command::Spectrum => {
            let r = run_spectrum(cfg)?;
            (r.metrics(), r.files(cfg)?, Some(r.window), None)
        }
        Command::Evolve => {
            let r = run_evolve(cfg)?;
            (
                r.metrics(),
                r.files(cfg)?,
                Some(r.trajectory.window()),
                None,
            )
        }
        Command::Transparency => {
            let r = run_transparency(cfg)?;
            (
                r.metrics(),
                r.files(cfg)?,
                Some(r.full.window()),
                Some(r.plan),
            )
        }
        Command::LzScan => {
            let r = run_lz_scan(cfg)?;
            (r.metrics(), r.files(cfg)?, None, None)
        }
    };
    let manifest = RunManifest {
        command: cmd,
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        window,
        plan,
        wall_time_s: start.elapsed().as_secs_f64(),
        metrics,
        artifacts: files.iter().map(|(name, _)| name.clone()).collect(),
    };
    Ok((manifest, files))
}

/// Run a command and write its files plus `manifest.json` into `out_dir`.
pub fn execute_to_dir(cmd: Command, cfg: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    let (manifest, files) = execute(cmd, cfg)?;
    std::fs::create_dir_all(out_dir)?;
    for (name, bytes) in &files {
        std::fs::write(out_dir.join(name), bytes)?;
    }
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}
