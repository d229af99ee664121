//! Quasi-Monte Carlo analysis on b-adic Haar wavelet spaces and spaces of
//! fractional smoothness.
//!
//! The crate is organised bottom-up:
//!
//! - [`badic`]: exact base-b points and elementary intervals.
//! - [`nets`]: van der Corput, Faure and generic digital nets, plus an
//!   exhaustive (t,m,s)-net verifier.
//! - [`haar`]: the b-adic Haar frame, exact inner products, weighted sequence
//!   norms and pointwise series evaluation.
//! - [`cubature`]: equal-weight QMC rules and the exactness check on
//!   approximation spaces.
//! - [`wce`]: worst-case error bounds on Haar wavelet spaces.
//! - [`fractional`]: Riemann-Liouville operators, reproducing kernels and the
//!   fractional discrepancy.
//!
//! Data-parallel inner loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.
//! Every reduction is performed sequentially over collected per-item results,
//! so both builds produce bit-identical floating-point output.

pub mod badic;
pub mod combinatorics;
pub mod cubature;
mod error;
pub mod fractional;
pub mod haar;
pub mod io;
pub mod nets;
pub mod par;
pub mod quadrature;
pub mod wce;

pub use error::{Error, Result};
