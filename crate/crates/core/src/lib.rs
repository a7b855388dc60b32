//! Numerical laboratory for oracle separations built from dispersing circuits.
//!
//! The crate is organised by subsystem:
//!
//! | module | contents |
//! |--------|----------|
//! | [`simcore`] | dense state vectors, Haar two-qubit gates, random circuits, group Fourier matrices |
//! | [`dispersion`] | L1 dispersion of circuit rows, pseudo-dispersion search, fourth-moment checks |
//! | [`signs`] | exact ±1 sign approximation of complex vectors |
//! | [`oracle1`] | single-level oracle identification: compile, prepare, identify |
//! | [`rfs`] | recursive oracle identification, FIND accounting, classical baseline, Z-potential referee |
//! | [`paulichain`] | Pauli-string Markov chain, lumped weight chain, spectral gaps, two-copy twirl |
//!
//! Conventions used throughout: qubit `k` is bit `k` of a basis index
//! (little-endian), and all randomness flows through explicit [`rng::Stream`]s.

pub mod dispersion;
pub mod error;
pub mod oracle1;
pub mod paulichain;
pub mod rfs;
pub mod rng;
pub mod signs;
pub mod simcore;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
