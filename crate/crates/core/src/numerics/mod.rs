//! Numerical building blocks shared by the constructions and diagnostics.

pub mod optimize;
pub mod poly;
pub mod quad;
