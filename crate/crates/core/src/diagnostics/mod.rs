//! Observables: energy, charge, local seminorms, the weighted metric, time spectra,
//! the mean-field resonance integral and the discrete Titchmarsh identity.

pub mod attraction;
pub mod meanfield;
pub mod norms;
pub mod spectrum;
pub mod titchmarsh;

pub use attraction::{attraction_report, AttractionReport, DiagRecord, Verdict};
pub use meanfield::{find_z_rho, sigma};
pub use norms::{charge, energy, metric_e_f, seminorm_e_r};
pub use spectrum::{time_spectrum, Peak, SpectrumReport};
pub use titchmarsh::{titchmarsh_support, SupportCheck};
