//! Klein–Gordon fields on the line coupled to concentrated U(1)-invariant nonlinearities.
//!
//! The crate builds solitary and multifrequency solutions, evolves arbitrary
//! finite-energy data with a reversible leapfrog scheme and measures the
//! approach to the solitary manifold in local energy seminorms.

pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod model;
pub mod multifreq;
pub mod numerics;
pub mod solitary;

pub use error::{Error, Result};
pub use model::{
    check_gap_condition, force, potential, validate_model, Coupling, FieldState, Finding, GapReport, GridSpec,
    MeanFieldSpec, ModelSpec, OscillatorSpec, Potential,
};
pub use solitary::{
    amplitude_roots, kappa, manifold_distance, sample_solitary, ManifoldDistanceReport, SolitaryWave,
};
