//! Experiment configs, figure presets and the command runners behind the CLI.

mod config;
mod presets;
mod run;

pub use config::{
    Artifact, HarmonicEntry, InitialSpec, LzScanSettings, ModeAmplitude, PotentialSpec, RunConfig,
    SpectrumSettings, TransparencySettings, WindowSpec, DEFAULT_SPECTRUM_WINDOW,
};
pub use presets::{preset, PRESETS};
pub use run::{
    execute, execute_to_dir, level_diagram, max_off_initial, run_evolve, run_lz_scan, run_spectrum,
    run_transparency, Command, EvolveRun, Files, LevelDiagram, LzScanRow, LzScanRun, RunManifest,
    SpectrumRun, TransparencyRun,
};
