//! Spectral fluctuation analysis of multilayer networks.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the numerical core:
//!
//! * [`analytics`]: the spacing-ratio density family `P(α, r)`, its
//!   normalization and cumulative form, and the `(k, m) -> α` index table.
//! * [`netgen`]: block-structured adjacency matrices for multilayer
//!   Erdős–Rényi networks, variance-equalizing block scalings and the
//!   bilayer crossover model.
//! * [`spectral`]: dense symmetric eigensolver, k-th order spacing ratios,
//!   histograms, Kolmogorov–Smirnov distances and α fitting.
//! * [`protein`]: PDB text parsing and residue distance-threshold networks.
//!
//! Ensembles, sweeps, file formats and the command line live in the `mlnet`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analytics;
mod error;
pub mod netgen;
pub mod protein;
pub mod quadrature;
pub mod spectral;

pub use error::{BlockId, Error, Result};
