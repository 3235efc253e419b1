//! Quantum decay in the time representation.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod quad;
pub mod spectral;
pub mod gamow;
pub mod interference;
pub mod survival;
pub mod density;
pub mod events;
pub mod fit;
pub mod moments;
pub mod io;

mod par;

pub use error::{DecayError, Result};
