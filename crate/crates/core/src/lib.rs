//! Simulation and training of diffractive optical networks for graph node
//! classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`field`]: scalar-diffraction primitives (complex fields, Fresnel
//!   propagation, phase modulation, detector readout).
//! - [`network`]: the layered forward model with optical skip channels and
//!   checkpoint serialization.
//! - [`training`]: softmax-MSE loss, hand-written reverse-mode gradients,
//!   Adam, the training loop and a finite-difference gradient checker.
//! - [`graphprep`]: dataset ingestion, PCA, approximate personalized
//!   PageRank, input assembly and train/test splitting.

pub mod error;
pub mod field;
pub mod graphprep;
pub mod network;
pub mod rng;
pub mod training;

pub use error::{Error, ParseErrorKind, Result};
pub use num_complex::Complex64;
