//! Analytic modes of a rectangular cavity and field weights at the qubit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Lx, Ly, Lz in metres.
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    /// Qubit position in the x–y cross-section, metres.
    pub qubit_x: f64,
    pub qubit_y: f64,
}

impl CavityGeometry {
    /// Cavity with the qubit at the geometric centre of the cross-section.
    pub fn centered(lx: f64, ly: f64, lz: f64) -> Result<Self> {
        Self::new(lx, ly, lz, lx / 2.0, ly / 2.0)
    }

    pub fn new(lx: f64, ly: f64, lz: f64, qubit_x: f64, qubit_y: f64) -> Result<Self> {
        for (name, v) in [("lx", lx), ("ly", ly), ("lz", lz)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: "cavity dimensions must be positive" });
            }
        }
        if !(qubit_x > 0.0 && qubit_x < lx && qubit_y > 0.0 && qubit_y < ly) {
            return Err(Error::InvalidParameter { name: "qubit_position", reason: "must lie strictly inside the cavity" });
        }
        Ok(Self { lx, ly, lz, qubit_x, qubit_y })
    }

    /// Uniformly dilated copy (positions scale too).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.lx * factor, self.ly * factor, self.lz * factor, self.qubit_x * factor, self.qubit_y * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Tm,
    Te,
}

impl ModeKind {
    fn prefix(self) -> &'static str {
        match self {
            ModeKind::Tm => "TM",
            ModeKind::Te => "TE",
        }
    }
}

/// (kind, m, n, p) with the usual existence rules: TM needs m, n ≥ 1;
/// TE needs p ≥ 1 and (m, n) ≠ (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeIndex {
    pub kind: ModeKind,
    pub m: u32,
    pub n: u32,
    pub p: u32,
}

impl ModeIndex {
    pub fn new(kind: ModeKind, m: u32, n: u32, p: u32) -> Result<Self> {
        let valid = match kind {
            ModeKind::Tm => m >= 1 && n >= 1,
            ModeKind::Te => p >= 1 && (m + n) >= 1,
        };
        if valid {
            Ok(Self { kind, m, n, p })
        } else {
            Err(Error::InvalidModeIndex { kind: kind.prefix(), m, n, p })
        }
    }

    pub fn tm(m: u32, n: u32, p: u32) -> Result<Self> {
        Self::new(ModeKind::Tm, m, n, p)
    }

    pub fn label(&self) -> String {
        format!("{}{}{}{}", self.kind.prefix(), self.m, self.n, self.p)
    }
}

/// f = (c/2) √((m/Lx)² + (n/Ly)² + (p/Lz)²).
pub fn mode_frequency(geometry: &CavityGeometry, index: ModeIndex) -> f64 {
    let kx = index.m as f64 / geometry.lx;
    let ky = index.n as f64 / geometry.ly;
    let kz = index.p as f64 / geometry.lz;
    0.5 * SPEED_OF_LIGHT * (kx * kx + ky * ky + kz * kz).sqrt()
}

/// sin(πt), exact at integer and half-integer arguments.
pub fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r.abs() == 0.5 {
        return r.signum();
    }
    (PI * r).sin()
}

/// sin(mπx/Lx)·sin(nπy/Ly) at a point of the cross-section.
pub fn field_weight_at(geometry: &CavityGeometry, m: u32, n: u32, x: f64, y: f64) -> f64 {
    sin_pi(m as f64 * (x / geometry.lx)) * sin_pi(n as f64 * (y / geometry.ly))
}

/// Field weight of TM_mn0 at the qubit position; the relative dipole
/// coupling scales with its magnitude.
pub fn field_weight(geometry: &CavityGeometry, m: u32, n: u32) -> f64 {
    field_weight_at(geometry, m, n, geometry.qubit_x, geometry.qubit_y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub index: ModeIndex,
    pub frequency: f64,
    pub field_weight: f64,
}

/// TM_mn0 modes with m ≤ `max_m`, n ≤ `max_n`, sorted by frequency.
pub fn tm_modes(geometry: &CavityGeometry, max_m: u32, max_n: u32) -> Vec<ModeSummary> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        for n in 1..=max_n {
            let index = ModeIndex { kind: ModeKind::Tm, m, n, p: 0 };
            out.push(ModeSummary { index, frequency: mode_frequency(geometry, index), field_weight: field_weight(geometry, m, n) });
        }
    }
    out.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap_or(core::cmp::Ordering::Equal));
    out
}
