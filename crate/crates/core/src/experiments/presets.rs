//! Compiled-in configurations for the figure scenarios.

use super::config::{
    InitialSpec, LzScanSettings, PotentialSpec, RunConfig, SpectrumSettings, TransparencySettings,
    WindowSpec,
};
use crate::model::{FluxProgram, ModeWindow};

/// Preset names with a one-line description each.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "fig1b",
        "diabatic and adiabatic levels over tau, alpha = 0.3, v0 = 0.08, sigma = 0.003",
    ),
    (
        "spectrum-pt",
        "bands and exceptional points at the PT-breaking point, alpha = 1, v0 = 0.02",
    ),
    (
        "spectrum-hermitian",
        "bands of the Hermitian ring, alpha = 0, v0 = 0.08",
    ),
    (
        "fig2a",
        "Hermitian drift, alpha = 0, v0 = 0.08, sigma = -0.003",
    ),
    (
        "fig2b",
        "Hermitian drift, alpha = 0, v0 = 0.08, sigma = 0.003",
    ),
    (
        "fig3a",
        "damped drift, alpha = 0.3, v0 = 0.08, sigma = -0.003",
    ),
    (
        "fig3b",
        "amplified drift, alpha = 0.3, v0 = 0.08, sigma = 0.003",
    ),
    (
        "fig4a",
        "frozen dynamics, alpha = 1, v0 = 0.02, sigma = -0.003",
    ),
    (
        "fig4b",
        "one-way cascade, alpha = 1, v0 = 0.02, sigma = 0.003",
    ),
    (
        "fig5",
        "delayed transparency, gaussian start at n = -4, M = -7, T = 1200",
    ),
    (
        "lz-scan",
        "Zener probability, theory against two-level integration, S = 0.08",
    ),
];

const EVOLVE_SPAN: [f64; 2] = [0.0, 2000.0];

fn evolve_preset(v0: f64, alpha: f64, sigma: f64) -> RunConfig {
    RunConfig {
        potential: Some(PotentialSpec::Reference { v0, alpha }),
        flux: Some(FluxProgram::Ramp { sigma, tau0: 0.0 }),
        initial: Some(InitialSpec::Delta { n0: 0 }),
        tau_span: Some(EVOLVE_SPAN),
        ..RunConfig::default()
    }
}

fn spectrum_preset(v0: f64, alpha: f64, f_search: [f64; 2]) -> RunConfig {
    RunConfig {
        potential: Some(PotentialSpec::Reference { v0, alpha }),
        window: WindowSpec::Fixed(ModeWindow::new(-16, 16).unwrap()),
        spectrum: Some(SpectrumSettings {
            f_search,
            ..SpectrumSettings::default()
        }),
        ..RunConfig::default()
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let cfg = match name {
        "fig1b" => RunConfig {
            flux: Some(FluxProgram::Ramp {
                sigma: 0.003,
                tau0: 0.0,
            }),
            tau_span: Some([0.0, 1000.0]),
            ..spectrum_preset(0.08, 0.3, [-0.5, 0.5])
        },
        "spectrum-pt" => spectrum_preset(0.02, 1.0, [0.0, 2.0]),
        "spectrum-hermitian" => spectrum_preset(0.08, 0.0, [-0.5, 0.5]),
        "fig2a" => evolve_preset(0.08, 0.0, -0.003),
        "fig2b" => evolve_preset(0.08, 0.0, 0.003),
        "fig3a" => evolve_preset(0.08, 0.3, -0.003),
        "fig3b" => evolve_preset(0.08, 0.3, 0.003),
        "fig4a" => evolve_preset(0.02, 1.0, -0.003),
        "fig4b" => evolve_preset(0.02, 1.0, 0.003),
        "fig5" => RunConfig {
            initial: Some(InitialSpec::Gaussian {
                center: -4.0,
                width: 9.0,
            }),
            tau_span: Some([0.0, 2400.0]),
            transparency: Some(TransparencySettings {
                m_cutoff: -7,
                t_target: 1200.0,
            }),
            ..evolve_preset(0.02, 1.0, -0.003)
        },
        "lz-scan" => RunConfig {
            lz_scan: Some(LzScanSettings {
                sigmas: vec![0.001, 0.002, 0.003, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05],
                v0s: vec![0.08],
                alpha: 0.0,
                n: 0,
            }),
            ..RunConfig::default()
        },
        _ => return None,
    };
    Some(cfg)
}
