//! Numerical pseudo-differential calculus on graded Lie groups.
//!
//! The crate ships two concrete backends: the three-dimensional Heisenberg
//! group, realised through compressions of its Schrödinger representations
//! onto a scaled Hermite basis, and abelian `R^n`, realised through scalar
//! characters on a Fourier lattice. Everything above the backends (symbols,
//! quantization, kernel decay, Sobolev norms, Gårding scans) is generic.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature enables
//! rayon-backed node maps; results are bit-identical either way because every
//! reduction runs in a fixed node order.
#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod error;
pub mod fourier;
pub mod grid;
pub mod group;
pub mod inequalities;
pub mod linalg;
pub mod quadrature;
pub mod quantizer;
pub mod repn;
pub mod samples;
pub mod symbol;

mod par;
mod prelude;

pub use error::{Error, Result};
pub use fourier::FourierField;
pub use grid::{GroupGrid, SampledFunction};
pub use group::{GradedStructure, GroupElement, HomogeneousMultiIndex};
pub use repn::{Discretization, FrequencyGrid, RocklandKind, RocklandSpec};
pub use symbol::{Symbol, SymbolClassParams};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used for representation blocks.
pub type CMat = nalgebra::DMatrix<C64>;
