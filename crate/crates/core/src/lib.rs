//! Optical pumping of a driven three-level atom.
//!
//! A laser couples the ground state |g⟩ to the excited state |e⟩, which decays
//! to the trap state |t⟩; |t⟩ may in turn decay back to |g⟩. The crate
//! integrates the master equation for this cycle and computes the spectrum of
//! photons emitted on the |e⟩ → |t⟩ transition three ways:
//!
//! * the closed-form Autler-Townes doublet ([`correlation::analytic_spectrum`]),
//! * the quantum regression theorem applied to the steady state
//!   ([`correlation::qrt_correlation`] and [`correlation::spectrum_from_correlation`]),
//! * conditional one-photon trajectories ([`trajectory::single_photon_spectrum`]),
//!   which also handle ramped drives and finite detuning.
//!
//! Rates and frequencies are dimensionless; the usual reference is Γ_e = 1.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod error;
pub mod lindblad;
pub mod params;
mod rk4;
pub mod spectrum;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use params::{generalized_rabi, omega_eff, AtomParams, DriveProfile};
pub use spectrum::{band_weight, FrequencyGrid, SpectrumResult};
pub use state::{dm_from_pure, is_physical, DensityMatrix, Level, StateVector};

/// Complex amplitude used throughout.
pub type Complex = num_complex::Complex64;
