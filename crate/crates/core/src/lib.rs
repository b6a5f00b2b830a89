//! Structured OFDM channel estimation over the cyclic group `Z_N`.
//!
//! Subcarrier indices form the additive group `Z_N`. Periodically nulled
//! tones `H = <d>` pair with the admissible time-domain tap support
//! `H⊥ = <N/d>`, and the subgroup estimator searches these annihilators for
//! the smallest one that holds a `(1 - ε)` share of the least-squares
//! impulse-response energy.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. IO, CSV, plotting and the command line live in the companion
//! `subgroup-ofdm-sim` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod config;
pub mod estimators;
pub mod group;
pub mod link;
pub mod transform;

mod error;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout the crate.
pub type Complex = num_complex::Complex64;
