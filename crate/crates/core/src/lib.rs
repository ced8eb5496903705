//! Diversity-multiplexing tradeoff (DMT) of the half-duplex relay channel with
//! a single-antenna source, a single-antenna relay and a two-antenna
//! destination, where the source-relay link enjoys a proximity gain `eta`
//! (its average SNR is `rho^eta` when the direct links see `rho`).
//!
//! The crate is `no_std` (it needs `alloc`) and splits into three layers:
//!
//! * exponent-space closed forms: [`closed_form`] and [`exponents`];
//! * numerical schedule optimisation for the global, blind and local relay
//!   strategies: [`optimize`] and [`curve`];
//! * the finite-SNR engine used to check the asymptotics empirically:
//!   [`channel`], [`sampler`], [`outage`], [`slope`] and [`tails`].
//!
//! All floating point work goes through `libm`, so results are bitwise
//! reproducible across platforms.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod closed_form;
pub mod curve;
mod error;
pub mod exponents;
mod math;
pub mod model;
pub mod optimize;
pub mod outage;
mod polytope;
pub mod sampler;
pub mod slope;
pub mod tails;

pub use error::{Error, Result};
pub use model::{ChannelExponents, NetworkParams, Schedule, Strategy};

/// Absolute tolerance used for equality checks on exponent-scale quantities.
pub const EXPONENT_TOL: f64 = 1e-12;
