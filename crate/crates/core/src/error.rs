use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid model: {0}")]
    Model(String),

    /// |omega| > m: no nonzero solitary waves for |ω| ≥ m.
    #[error("omega = {omega} lies outside the solitary band [-{mass}, {mass}]: no nonzero solitary waves for |ω|≥m")]
    OutsideBand { omega: f64, mass: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invalid spectrum request: {0}")]
    Spectrum(String),

    #[error("sequence is identically zero")]
    ZeroSequence,

    #[error("sigma is undefined at omega = {omega}: rho_hat does not vanish at the resonance xi = {xi}")]
    Resonant { omega: f64, xi: f64 },

    #[error("integration failed: {0}")]
    Quadrature(String),
}
