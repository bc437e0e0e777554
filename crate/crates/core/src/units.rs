//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Simulation unit of angular frequency is 2π × 1 GHz: an operator entry of
//! `1.0` stands for ω = 2π × 10⁹ rad/s, so entries read as GHz. The matching
//! time unit inside the integrator is the nanosecond, and the Schrödinger
//! term carries the explicit 2π.

use core::f64::consts::PI;

#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = 1.054_571_817_65e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Superconducting flux quantum h/2e.
pub const FLUX_QUANTUM: f64 = 2.067_833_848_46e-15;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;
pub const KHZ: f64 = 1e3;

/// Hz → simulation units (2π GHz).
#[inline]
pub fn hz_to_sim(hz: f64) -> f64 {
    hz / GHZ
}

#[inline]
pub fn sim_to_hz(sim: f64) -> f64 {
    sim * GHZ
}

#[inline]
pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

#[inline]
pub fn ordinary(angular: f64) -> f64 {
    angular / (2.0 * PI)
}

/// Power in dBm to watts: P = 10^((dBm − 30)/10).
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Power at the end of a line: attenuation in dB (negative) is added before
/// converting to watts.
#[inline]
pub fn attenuated_watts(source_dbm: f64, attenuation_db: f64) -> f64 {
    dbm_to_watts(source_dbm + attenuation_db)
}
