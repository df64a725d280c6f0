//! Finite chains of coupled n-level quantum systems: Hamiltonian
//! construction, the interaction/level-width scaling law, and tests of
//! local thermal descriptions for contiguous subgroups of a globally
//! canonical chain.
//!
//! The crate is organized bottom-up:
//!
//! - [`algebra`]: SU(n) generators, site embeddings, partial trace.
//! - [`chain`]: chain Hamiltonians, coefficient extraction, partitions.
//! - [`spectra`]: eigendecomposition, level width and interaction strength.
//! - [`thermal`]: canonical states, product bases, overlap distributions,
//!   distances and spectral temperatures.
//! - [`experiments`]: seeded realization sweeps.
//! - [`config`], [`report`], [`oracle`]: config files, CSV output and the
//!   built-in self-check suite used by the command-line front end.

pub mod algebra;
pub mod chain;
pub mod config;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod report;
pub mod spectra;
pub mod thermal;
pub mod tolerance;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
