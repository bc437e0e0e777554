//! Circuit-QED models for a weakly anharmonic qubit dispersively coupled to
//! the modes of a rectangular microwave cavity.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Frequencies
//! crossing the public API are ordinary frequencies in Hz, rates are in
//! s⁻¹, powers are in watts or dBm. Operators are stored in simulation
//! units of 2π × 1 GHz, see [`units`].
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cubic;
pub mod device;
pub mod duffing;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod linalg;
pub mod lm;
pub mod operators;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
