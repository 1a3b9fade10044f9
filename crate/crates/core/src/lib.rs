//! Equivalent-circuit simulation of magnetically coupled resonator chains
//! for wireless power transfer, optionally with a metamaterial slab of
//! identical unit-cell resonators between transmitter and receiver.
//!
//! All quantities are SI base units (H, F, Ω, Hz, m, V, A).

pub mod circuit;
pub mod coupling;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod scenario;
pub mod sweep;
pub mod tuner;

pub use error::{Error, Result};
