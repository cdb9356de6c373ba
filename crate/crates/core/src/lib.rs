//! Spike super-resolution toolkit: Matrix Pencil recovery of positive point
//! sources from band-limited Fourier samples, moment-matched adversarial
//! signal pairs, brute-force error-set diameters, and seeded Monte Carlo
//! experiments measuring error amplification against the super-resolution
//! factor.

pub mod adversarial;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod parallel;
pub mod pencil;

pub use error::{Error, Result};
pub use model::{MeasurementGrid, SpikeSignal};
pub use parallel::Execution;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
