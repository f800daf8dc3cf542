//! Exponentially small splitting of separatrices for a whiskered torus with
//! silver frequency ratio: exact resonance arithmetic, dominant harmonics of
//! the Melnikov potential, the four-harmonic splitting model and its
//! critical points.

pub mod config;
pub mod error;
pub mod figures;
pub mod melnikov;
pub mod phases;
pub mod quadratic_field;
pub mod real;
pub mod resonances;
pub mod splitting;
pub mod verify;

pub use error::{Error, Result};
pub use quadratic_field::{FrequencyModel, IntMat2, IntVec2, RingElement};
pub use real::{MpFloat, Real};
