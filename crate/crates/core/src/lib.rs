//! Simulation and closed-form oracles for heralded transfer of single-excitation
//! (W-type) entanglement from N two-level systems onto N free-electron
//! sideband ladders.
//!
//! The composite space is ordered as (electron 1..N, TLS 1..N). Electron
//! levels are stored as offsets `m ∈ {-M..M}` from the common reference
//! sideband, TLS levels as `g = 0`, `e = 1`. Units are ħ = 1.

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod herald;
pub mod hilbert;
pub mod linalg;
pub mod product;
pub mod scans;
pub mod verify;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
