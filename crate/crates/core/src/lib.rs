//! Approximating pure quantum circuits by budgeted stochastic mixtures of
//! cheaper circuits.
//!
//! The pipeline: a [`circuit::Circuit`] over {CNOT, H, S, Z_α} is scanned for
//! small-angle Z-phase gates; each is priced by the exact diamond distance of
//! replacing it with a mixture of the identity and an over-rotation
//! ([`distances`]); a greedy pass accepts replacements that cut the CNOT count
//! until the error budget is spent ([`protocol`]); every shot then samples
//! one concrete circuit from the plan. [`verify`] checks the resulting
//! channel against the original at small widths.

pub mod circuit;
pub mod cli;
pub mod distances;
pub mod error;
pub mod generators;
pub mod protocol;
pub mod rng;
pub mod sim;
pub mod simplify;
pub mod verify;

mod trace_ascent;

pub use circuit::{normalize_phase, Angle, Circuit, Gate};
pub use error::{Error, Result};
