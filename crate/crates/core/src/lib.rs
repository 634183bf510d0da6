//! Numerical cell problems and homogenised integrands for free-discontinuity
//! energies `∫ f(x, ∇u) dx + ∫_{S_u} g(x, [u], ν_u) dH^{n-1}`.

pub mod cells;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod homogenize;
pub mod integrands;
pub mod linalg;
pub mod truncation;
pub mod verify;

pub use error::{Error, Result};
