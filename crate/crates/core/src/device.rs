//! Device parameters and closed-form circuit-QED relations.
//!
//! Public frequencies are ordinary frequencies (Hz). Linewidths and decay
//! rates are in s⁻¹; cavity linewidths are angular (γ = 2π × FWHM in Hz),
//! the qubit rates satisfy Γ_q = 1/T1.
//!
//! Two detuning conventions appear and are kept apart by name:
//! [`SystemModel::detuning`] is Δ = ω_q − ω_r (dispersive formulas), while
//! the drive detuning ω_d − ω_r lives in [`crate::dynamics`].

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::cubic::brent;
use crate::error::{Error, Result};
use crate::units::{
    angular, dbm_to_watts, watts_to_dbm, BOLTZMANN, ELEMENTARY_CHARGE, FLUX_QUANTUM, HBAR, PLANCK,
    VACUUM_PERMITTIVITY,
};

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter { name, reason: "must be strictly positive and finite" })
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter { name, reason: "must be non-negative and finite" })
    }
}

/// An energy, stored in joules.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Energy(f64);

impl Energy {
    pub fn from_joules(j: f64) -> Self {
        Self(j)
    }

    pub fn from_hz(hz: f64) -> Self {
        Self(hz * PLANCK)
    }

    pub fn joules(self) -> f64 {
        self.0
    }

    /// E/h.
    pub fn hz(self) -> f64 {
        self.0 / PLANCK
    }

    /// E/k_B.
    pub fn kelvin(self) -> f64 {
        self.0 / BOLTZMANN
    }
}

/// A power, stored in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Power(f64);

impl Power {
    pub fn from_watts(w: f64) -> Self {
        Self(w)
    }

    pub fn from_dbm(dbm: f64) -> Self {
        Self(dbm_to_watts(dbm))
    }

    pub fn watts(self) -> f64 {
        self.0
    }

    pub fn dbm(self) -> f64 {
        watts_to_dbm(self.0)
    }
}

/// Physical junction quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionParameters {
    /// I_c in amperes.
    pub critical_current: f64,
    /// C in farads.
    pub capacitance: f64,
    /// Overlap area in m².
    pub area: f64,
    /// Barrier thickness in m.
    pub barrier_thickness: f64,
    pub relative_permittivity: f64,
}

impl JunctionParameters {
    pub fn new(
        critical_current: f64,
        capacitance: f64,
        area: f64,
        barrier_thickness: f64,
        relative_permittivity: f64,
    ) -> Result<Self> {
        Ok(Self {
            critical_current: positive("critical_current", critical_current)?,
            capacitance: positive("capacitance", capacitance)?,
            area: positive("area", area)?,
            barrier_thickness: positive("barrier_thickness", barrier_thickness)?,
            relative_permittivity: positive("relative_permittivity", relative_permittivity)?,
        })
    }

    /// Junction whose capacitance is the parallel-plate value of its geometry.
    pub fn from_geometry(critical_current: f64, area: f64, barrier_thickness: f64, relative_permittivity: f64) -> Result<Self> {
        let c = geometric_capacitance(area, barrier_thickness, relative_permittivity)?;
        Self::new(critical_current, c, area, barrier_thickness, relative_permittivity)
    }

    pub fn charging_energy(&self) -> Energy {
        Energy(ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * self.capacitance))
    }

    pub fn josephson_energy(&self) -> Energy {
        Energy(FLUX_QUANTUM * self.critical_current / (2.0 * PI))
    }

    pub fn inductance(&self) -> f64 {
        FLUX_QUANTUM / (2.0 * PI * self.critical_current)
    }

    pub fn zero_point_phase(&self) -> f64 {
        zero_point_phase(self.charging_energy(), self.josephson_energy())
    }

    pub fn transmon_frequency(&self) -> Result<f64> {
        transmon_frequency(self.josephson_energy(), self.charging_energy())
    }
}

/// E_C = e²/2C.
pub fn charging_energy(capacitance: f64) -> Result<Energy> {
    let c = positive("capacitance", capacitance)?;
    Ok(Energy(ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * c)))
}

/// E_J = φ₀ I_c / 2π.
pub fn josephson_energy(critical_current: f64) -> Result<Energy> {
    let ic = positive("critical_current", critical_current)?;
    Ok(Energy(FLUX_QUANTUM * ic / (2.0 * PI)))
}

/// L_J = φ₀ / (2π I_c), henries.
pub fn junction_inductance(critical_current: f64) -> Result<f64> {
    let ic = positive("critical_current", critical_current)?;
    Ok(FLUX_QUANTUM / (2.0 * PI * ic))
}

/// Parallel-plate capacitance ε₀ ε_r A / d, farads.
pub fn geometric_capacitance(area: f64, thickness: f64, relative_permittivity: f64) -> Result<f64> {
    Ok(VACUUM_PERMITTIVITY * positive("relative_permittivity", relative_permittivity)? * positive("area", area)?
        / positive("barrier_thickness", thickness)?)
}

/// Transmon transition frequency (√(8 E_J E_C) − E_C)/h in Hz.
pub fn transmon_frequency(ej: Energy, ec: Energy) -> Result<f64> {
    if !(ec.0 > 0.0) {
        return Err(Error::InvalidParameter { name: "charging_energy", reason: "must be strictly positive" });
    }
    if !(ej.0 > ec.0) {
        return Err(Error::OutsideTransmonRegime(ej.0 / ec.0));
    }
    Ok(((8.0 * ej.0 * ec.0).sqrt() - ec.0) / PLANCK)
}

/// Critical current giving transition frequency `qubit_hz` for capacitance
/// `capacitance`, found by bracketing root search.
pub fn critical_current_for_frequency(qubit_hz: f64, capacitance: f64) -> Result<f64> {
    let target = positive("qubit_frequency", qubit_hz)?;
    let ec = charging_energy(capacitance)?;
    // E_J(I) = φ₀ I/2π; the transmon regime starts at E_J = E_C.
    let i_min = ec.0 * 2.0 * PI / FLUX_QUANTUM * (1.0 + 1e-9);
    let f = |ic: f64| {
        let ej = Energy(FLUX_QUANTUM * ic / (2.0 * PI));
        ((8.0 * ej.0 * ec.0).sqrt() - ec.0) / PLANCK - target
    };
    let mut hi = i_min * 2.0;
    while f(hi) < 0.0 {
        hi *= 4.0;
        if !hi.is_finite() {
            return Err(Error::RootNotBracketed { lo: i_min, hi });
        }
    }
    brent(f, i_min, hi, 1e-15)
}

/// φ_ZPF = (2 E_C / E_J)^{1/4}.
pub fn zero_point_phase(ec: Energy, ej: Energy) -> f64 {
    (2.0 * ec.0 / ej.0).powf(0.25)
}

/// Self- and cross-Kerr coefficients of one mode, ordinary frequencies (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrCoefficients {
    /// K_a = α (g/Δ)⁴.
    pub self_kerr_cavity: f64,
    /// K_b = α.
    pub self_kerr_qubit: f64,
    /// χ = −2 g² α / (Δ (Δ − α)).
    pub cross_kerr: f64,
}

/// Kerr coefficients from anharmonicity α, coupling g and detuning
/// Δ = ω_q − ω_r, all in Hz.
pub fn kerr_coefficients(anharmonicity: f64, coupling: f64, detuning: f64) -> Result<KerrCoefficients> {
    check_dispersive(anharmonicity, detuning)?;
    let ratio = coupling / detuning;
    Ok(KerrCoefficients {
        self_kerr_cavity: anharmonicity * ratio.powi(4),
        self_kerr_qubit: anharmonicity,
        cross_kerr: -2.0 * coupling * coupling * anharmonicity / (detuning * (detuning - anharmonicity)),
    })
}

fn check_dispersive(anharmonicity: f64, detuning: f64) -> Result<()> {
    if detuning == 0.0 {
        return Err(Error::DispersiveBreakdown("qubit-cavity detuning is zero"));
    }
    if detuning == anharmonicity {
        return Err(Error::DispersiveBreakdown("detuning equals the anharmonicity"));
    }
    Ok(())
}

/// K_eff = K_a (1 − ⟨φ_b²⟩/2); changes sign once ⟨φ_b²⟩ exceeds 2.
pub fn effective_kerr(self_kerr: f64, phi_b_sq: f64) -> Result<f64> {
    non_negative("phi_b_sq", phi_b_sq)?;
    Ok(self_kerr * (1.0 - 0.5 * phi_b_sq))
}

/// Junction-switching input power
/// P* = (φ₀ I_c / 2π)(ω_r/ω_q)(Δ/g)² γ, with Δ = ω_r − ω_q.
///
/// Frequencies in Hz, `linewidth` γ in s⁻¹ (angular).
pub fn critical_input_power(critical_current: f64, cavity_hz: f64, qubit_hz: f64, coupling_hz: f64, linewidth: f64) -> Result<Power> {
    let ej = josephson_energy(critical_current)?;
    let wr = positive("cavity_frequency", cavity_hz)?;
    let wq = positive("qubit_frequency", qubit_hz)?;
    let g = positive("coupling", coupling_hz)?;
    let gamma = positive("linewidth", linewidth)?;
    let delta = wr - wq;
    if delta == 0.0 {
        return Err(Error::DispersiveBreakdown("qubit-cavity detuning is zero"));
    }
    Ok(Power(ej.0 * (wr / wq) * (delta / g).powi(2) * gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParameters {
    /// ν_q in Hz.
    pub frequency: f64,
    /// α/2π in Hz, negative for a transmon.
    pub anharmonicity: f64,
    /// Γ_q = 1/T1 in s⁻¹.
    pub relaxation_rate: f64,
    /// Γ_Φ in s⁻¹.
    pub dephasing_rate: f64,
}

impl QubitParameters {
    pub fn new(frequency: f64, anharmonicity: f64, relaxation_rate: f64, dephasing_rate: f64) -> Result<Self> {
        if !anharmonicity.is_finite() {
            return Err(Error::InvalidParameter { name: "anharmonicity", reason: "must be finite" });
        }
        Ok(Self {
            frequency: positive("qubit_frequency", frequency)?,
            anharmonicity,
            relaxation_rate: non_negative("relaxation_rate", relaxation_rate)?,
            dephasing_rate: non_negative("dephasing_rate", dephasing_rate)?,
        })
    }

    pub fn t1(&self) -> f64 {
        1.0 / self.relaxation_rate
    }
}

/// One cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityMode {
    pub label: String,
    /// ν_r in Hz.
    pub frequency: f64,
    /// γ₁ in s⁻¹.
    pub port1_coupling: f64,
    /// γ₂ in s⁻¹.
    pub port2_coupling: f64,
    /// γ₀ in s⁻¹.
    pub internal_loss: f64,
    /// g/2π in Hz.
    pub dipole_coupling: Option<f64>,
    /// Measured K_a/2π in Hz; when absent K_a is derived from g.
    pub self_kerr: Option<f64>,
}

impl CavityMode {
    pub fn new(label: &str, frequency: f64, port1_coupling: f64, port2_coupling: f64, internal_loss: f64) -> Result<Self> {
        let mode = Self {
            label: String::from(label),
            frequency: positive("mode_frequency", frequency)?,
            port1_coupling: non_negative("port1_coupling", port1_coupling)?,
            port2_coupling: non_negative("port2_coupling", port2_coupling)?,
            internal_loss: non_negative("internal_loss", internal_loss)?,
            dipole_coupling: None,
            self_kerr: None,
        };
        positive("total_linewidth", mode.total_linewidth())?;
        Ok(mode)
    }

    pub fn with_coupling(mut self, coupling_hz: f64) -> Self {
        self.dipole_coupling = Some(coupling_hz);
        self
    }

    pub fn with_self_kerr(mut self, kerr_hz: f64) -> Self {
        self.self_kerr = Some(kerr_hz);
        self
    }

    /// γ_tot = γ₀ + γ₁ + γ₂.
    pub fn total_linewidth(&self) -> f64 {
        self.internal_loss + self.port1_coupling + self.port2_coupling
    }

    pub fn angular_frequency(&self) -> f64 {
        angular(self.frequency)
    }
}

/// Qubit plus its cavity modes; the single source of detunings.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub qubit: QubitParameters,
    pub modes: Vec<CavityMode>,
    pub junction: Option<JunctionParameters>,
}

impl SystemModel {
    pub fn new(qubit: QubitParameters, modes: Vec<CavityMode>, junction: Option<JunctionParameters>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::DuplicateMode(m.label.clone()));
            }
            check_dispersive(qubit.anharmonicity, qubit.frequency - m.frequency)?;
        }
        Ok(Self { qubit, modes, junction })
    }

    pub fn mode(&self, index: usize) -> Result<&CavityMode> {
        self.modes.get(index).ok_or(Error::ModeIndex(index))
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label.eq_ignore_ascii_case(label))
    }

    /// Δ = ν_q − ν_r in Hz.
    pub fn detuning(&self, index: usize) -> Result<f64> {
        Ok(self.qubit.frequency - self.mode(index)?.frequency)
    }

    fn coupling(&self, index: usize) -> Result<f64> {
        let mode = self.mode(index)?;
        mode.dipole_coupling
            .ok_or_else(|| Error::IncompleteModel(alloc::format!("mode {} has no dipole coupling", mode.label)))
    }

    /// Kerr coefficients of a mode; a measured self-Kerr overrides the
    /// derived one.
    pub fn kerr(&self, index: usize) -> Result<KerrCoefficients> {
        let g = self.coupling(index)?;
        let mut k = kerr_coefficients(self.qubit.anharmonicity, g, self.detuning(index)?)?;
        if let Some(measured) = self.mode(index)?.self_kerr {
            k.self_kerr_cavity = measured;
        }
        Ok(k)
    }

    /// Dressed (ν'_r, ν'_q) for mean qubit excitation `n_b`:
    /// ω'_r = ω_r − [4g²/(Δ(Δ−α))](α/2) n_b, ω'_q = ω_q + (α/2) n_b.
    pub fn dressed_frequencies(&self, index: usize, n_b: f64) -> Result<(f64, f64)> {
        non_negative("n_b", n_b)?;
        let g = self.coupling(index)?;
        let delta = self.detuning(index)?;
        let alpha = self.qubit.anharmonicity;
        check_dispersive(alpha, delta)?;
        let slope = dressed_slope(g, delta, alpha);
        let qubit_shift = 0.5 * alpha * n_b;
        Ok((self.mode(index)?.frequency + slope * qubit_shift, self.qubit.frequency + qubit_shift))
    }
}

/// dω'_r/dω'_q = −4g²/(Δ(Δ−α)).
pub fn dressed_slope(coupling: f64, detuning: f64, anharmonicity: f64) -> f64 {
    -4.0 * coupling * coupling / (detuning * (detuning - anharmonicity))
}

/// Photons in a critically coupled cavity driven at power P:
/// n = P / (γ ħ ω_r).
pub fn critically_coupled_photons(power_w: f64, linewidth: f64, cavity_hz: f64) -> f64 {
    power_w / (linewidth * HBAR * angular(cavity_hz))
}
