//! Complexified Hermite and Laguerre functions, the twisted-translation
//! operators `π(z,w)` on `L²(ℝⁿ)`, and numerical verification of Gutzmer's
//! formula for Hermite expansions together with its supporting identities.

pub mod cli;
pub mod error;
pub mod gutzmer;
pub mod phase_space;
pub mod quadrature;
pub mod special_functions;
pub mod spectral;

pub use error::{Error, Result};
