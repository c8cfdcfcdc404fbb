//! Quantum particle on a ring with a complex (PT-symmetric) potential and a
//! time-dependent magnetic flux.
//!
//! Energies are in units of `hbar^2 / (2 m R^2)` and times in the matching
//! unit `tau`. The state is expanded in winding numbers `n`; the potential
//! couples `n` to `n - q` through its Fourier coefficients `u_q`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lz;
pub mod model;
pub mod ode;
mod ode_tableau;
pub mod optimize;
pub mod spectrum;

pub use num_complex::Complex64;

pub use dynamics::{evolve, evolve_sampled, triangular_oracle, PropagatorConfig, Trajectory};
pub use error::{Error, Result};
pub use lz::{
    asymmetry_residual, gauge_map, lz_probability, plan_transparency, two_level_lz, GaugeDirection,
    LZEvent, TransparencyPlan,
};
pub use model::{
    free_energy, is_pt_symmetric, make_reference_potential, sample_potential, FluxProgram,
    ModeWindow, Picture, RingPotential, WaveState,
};
pub use spectrum::{
    band_sweep, build_hamiltonian, eigensolve, estimate_alpha_c, locate_exceptional_points,
    BandStructure, EPReport, EigenSolution, HamiltonianMatrix,
};
