//! Wave-front tracking for one-dimensional balance laws
//! `∂_t u + ∂_x f(ζ(x), u) = 0` whose flux depends on a coefficient `ζ` of
//! bounded variation.

pub mod cli;
pub mod coefficient;
pub mod error;
pub mod models;
pub mod numerics;
pub mod riemann;
pub mod tracking;
pub mod verify;

pub use error::{Error, Result};
