//! Lindblad evolution of the driven multilevel qubit and the virtual Rabi
//! and T1 experiments built on it.
//!
//! Hamiltonians are in simulation units (see [`crate::units`]); rates and
//! times crossing this module's API are in s⁻¹ and s.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::device::{CavityMode, SystemModel};
use crate::error::{Error, Result};
use crate::estimation::{fit_damped_sinusoid, spectral_peak, Trace};
use crate::linalg::CMatrix;
use crate::operators::{annihilation, hamiltonian_driven_qubit_detuned, number_operator, FockOperator};
use crate::units::{angular, ordinary, HBAR};

/// n_eff = (γ₁/|Δ|)·√(4γ₁P/(ħω_r γ_tot²)), Δ = ω_d − ω_r.
///
/// Angular quantities in s⁻¹. The result is amplitude-like (it scales as
/// √P) and enters the Hamiltonian as g√n_eff.
pub fn effective_photon_number(power_w: f64, port_coupling: f64, total_linewidth: f64, drive_detuning: f64, cavity_angular: f64) -> Result<f64> {
    if drive_detuning == 0.0 {
        return Err(Error::ResonantDrive);
    }
    if !(power_w >= 0.0) {
        return Err(Error::InvalidParameter { name: "power", reason: "must be non-negative" });
    }
    Ok(port_coupling / drive_detuning.abs() * displacement_amplitude(power_w, port_coupling, total_linewidth, cavity_angular))
}

/// ε = √(4γ₁P/(ħω_r γ_tot²)), the driven-cavity field amplitude.
pub fn displacement_amplitude(power_w: f64, port_coupling: f64, total_linewidth: f64, cavity_angular: f64) -> f64 {
    (4.0 * port_coupling * power_w / (HBAR * cavity_angular * total_linewidth * total_linewidth)).sqrt()
}

/// Qubit drive coefficient g·γ₁ε/Δ of the displaced-frame Hamiltonian, in
/// the units of `coupling`.
pub fn drive_amplitude_coefficient(coupling: f64, port_coupling: f64, epsilon: f64, drive_detuning: f64) -> Result<f64> {
    if drive_detuning == 0.0 {
        return Err(Error::ResonantDrive);
    }
    Ok(coupling * port_coupling * epsilon / drive_detuning)
}

/// ω_Rabi/2π = (2g/2π)·√(γ₁P/(Δ²ħω_d)) in Hz. Equals the Hamiltonian
/// route 2g√n_eff only when γ₁ = γ_tot/2.
pub fn rabi_frequency_from_power(coupling_hz: f64, port_coupling: f64, power_w: f64, drive_detuning: f64, drive_angular: f64) -> Result<f64> {
    if drive_detuning == 0.0 {
        return Err(Error::ResonantDrive);
    }
    Ok(2.0 * coupling_hz * (port_coupling * power_w / (drive_detuning * drive_detuning * HBAR * drive_angular)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiFrequency {
    /// 2g√n_eff, Hz.
    pub undamped: f64,
    /// √(ω_R² − (Γ_q/4)²)/2π, Hz; zero when overdamped.
    pub damped: f64,
    pub overdamped: bool,
}

pub fn rabi_frequency_analytic(coupling_hz: f64, n_eff: f64, relaxation_rate: f64) -> Result<RabiFrequency> {
    if !(n_eff >= 0.0) {
        return Err(Error::InvalidParameter { name: "n_eff", reason: "must be non-negative" });
    }
    let undamped = 2.0 * coupling_hz.abs() * n_eff.sqrt();
    let arg = angular(undamped).powi(2) - (relaxation_rate / 4.0).powi(2);
    Ok(RabiFrequency { undamped, damped: if arg > 0.0 { ordinary(arg.sqrt()) } else { 0.0 }, overdamped: arg < 0.0 })
}

/// Master-equation problem: H in simulation units, collapse operators with
/// rates in s⁻¹, output times in s measured from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    pub hamiltonian: FockOperator,
    pub collapse: Vec<(FockOperator, f64)>,
    pub initial: CMatrix,
    pub times: Vec<f64>,
}

const STATE_TOL: f64 = 1e-10;

impl LindbladSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.hamiltonian.dim();
        for (c, rate) in &self.collapse {
            if c.dim() != d {
                return Err(Error::DimensionMismatch(c.dim(), d));
            }
            if !(*rate >= 0.0 && rate.is_finite()) {
                return Err(Error::InvalidParameter { name: "rate", reason: "collapse rates must be non-negative" });
            }
        }
        if self.initial.dim() != d {
            return Err(Error::DimensionMismatch(self.initial.dim(), d));
        }
        if self.initial.hermiticity_defect() > STATE_TOL {
            return Err(Error::InvalidState("not Hermitian"));
        }
        if (self.initial.trace().re - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState("trace differs from 1"));
        }
        if self.initial.hermitian_eigenvalues().iter().any(|e| *e < -STATE_TOL) {
            return Err(Error::InvalidState("not positive semidefinite"));
        }
        if self.times.iter().any(|t| !(*t >= 0.0)) || self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter { name: "times", reason: "must be non-negative and non-decreasing" });
        }
        Ok(())
    }
}

/// Vectorised generator (row-major vec, time in ns):
/// L = −i2π(H⊗I − I⊗Hᵀ) + Σ r (c⊗c̄ − ½c†c⊗I − ½I⊗(c†c)ᵀ).
fn superoperator(h: &CMatrix, collapse: &[(CMatrix, f64)]) -> CMatrix {
    let id = CMatrix::identity(h.dim());
    let mut l = (&h.kron(&id) - &id.kron(&h.transpose())).scale(Complex64::new(0.0, -2.0 * PI));
    for (c, rate) in collapse {
        let cdc = &c.adjoint() * c;
        let jump = &c.kron(&c.conj()) - &(&cdc.kron(&id) + &id.kron(&cdc.transpose())).scale_real(0.5);
        l = &l + &jump.scale_real(*rate);
    }
    l
}

/// One RK4 step of a linear ODE is the matrix I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24.
fn rk4_propagator(l: &CMatrix, h: f64) -> CMatrix {
    let id = CMatrix::identity(l.dim());
    let hl = l.scale_real(h);
    let mut m = &id + &hl.scale_real(0.25);
    for k in [3.0, 2.0, 1.0] {
        m = &id + &(&hl * &m).scale_real(1.0 / k);
    }
    m
}

fn symmetrize_vec(y: &mut [Complex64], d: usize) -> f64 {
    let mut tr = 0.0;
    for i in 0..d {
        y[i * d + i].im = 0.0;
        tr += y[i * d + i].re;
        for j in (i + 1)..d {
            let avg = 0.5 * (y[i * d + j] + y[j * d + i].conj());
            y[i * d + j] = avg;
            y[j * d + i] = avg.conj();
        }
    }
    tr
}

/// Density matrices at `spec.times` by fixed-step RK4, step
/// min(1/(50·scale), spacing/10) with scale the largest rate in the
/// generator.
pub fn lindblad_evolve(spec: &LindbladSpec) -> Result<Vec<CMatrix>> {
    spec.validate()?;
    let h = spec.hamiltonian.matrix();
    let d = h.dim();
    let collapse: Vec<(CMatrix, f64)> = spec
        .collapse
        .iter()
        .filter(|(_, r)| *r > 0.0)
        .map(|(c, r)| (c.matrix().clone(), r * 1e-9))
        .collect();
    let l = superoperator(h, &collapse);
    let scale = 2.0 * PI * h.max_row_sum() + collapse.iter().map(|(c, r)| r * (&c.adjoint() * c).max_row_sum()).sum::<f64>();

    let times_ns: Vec<f64> = spec.times.iter().map(|t| t * 1e9).collect();
    let mut spacing = f64::INFINITY;
    let mut prev = 0.0;
    for &t in &times_ns {
        if t > prev {
            spacing = spacing.min(t - prev);
        }
        prev = t;
    }
    let mut dt_max = spacing / 10.0;
    if scale > 0.0 {
        dt_max = dt_max.min(1.0 / (50.0 * scale));
    }

    let mut y: Vec<Complex64> = spec.initial.as_slice().to_vec();
    let mut buf = vec![Complex64::new(0.0, 0.0); d * d];
    let mut cache: Option<(f64, CMatrix)> = None;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times_ns.len());
    for &target in &times_ns {
        let interval = target - now;
        if interval > 0.0 {
            let steps = ((interval / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let step = interval / steps as f64;
            let reuse = matches!(&cache, Some((hc, _)) if (hc - step).abs() <= 1e-12 * step);
            if !reuse {
                cache = Some((step, rk4_propagator(&l, step)));
            }
            let prop = &cache.as_ref().expect("propagator cached").1;
            for k in 0..steps {
                prop.mul_vec(&y, &mut buf);
                core::mem::swap(&mut y, &mut buf);
                let tr = symmetrize_vec(&mut y, d);
                let drift = (tr - 1.0).abs();
                if drift > 1e-6 || !drift.is_finite() {
                    return Err(Error::Integrator { time: (now + (k + 1) as f64 * step) * 1e-9, drift });
                }
            }
            now = target;
        }
        out.push(CMatrix::from_row_major(d, y.clone())?);
    }
    Ok(out)
}

/// Pure state |level⟩⟨level|.
pub fn basis_state(dim: usize, level: usize) -> Result<CMatrix> {
    if level >= dim {
        return Err(Error::InvalidParameter { name: "level", reason: "beyond truncation" });
    }
    let mut rho = CMatrix::zeros(dim);
    rho[(level, level)] = Complex64::new(1.0, 0.0);
    Ok(rho)
}

/// The qubit-drive system of a Rabi or T1 experiment, in the frame of
/// the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenQubit {
    /// g/2π, Hz.
    pub coupling: f64,
    /// K_b/2π, Hz.
    pub kerr: f64,
    /// Γ_q, s⁻¹.
    pub relaxation_rate: f64,
    /// Γ_Φ, s⁻¹.
    pub dephasing_rate: f64,
    /// (ω_q − ω_d)/2π, Hz; zero for a resonant drive.
    pub qubit_minus_drive: f64,
    pub dim: usize,
}

/// Default qubit truncation for drive experiments.
pub const DEFAULT_QUBIT_DIM: usize = 6;

impl DrivenQubit {
    /// Resonant drive through `mode`, with K_b = α.
    pub fn from_system(system: &SystemModel, mode: usize, dim: usize) -> Result<Self> {
        let m = system.mode(mode)?;
        let coupling = m
            .dipole_coupling
            .ok_or_else(|| Error::IncompleteModel(alloc::format!("mode {} has no dipole coupling", m.label)))?;
        Ok(Self {
            coupling,
            kerr: system.qubit.anharmonicity,
            relaxation_rate: system.qubit.relaxation_rate,
            dephasing_rate: system.qubit.dephasing_rate,
            qubit_minus_drive: 0.0,
            dim,
        })
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn hamiltonian(&self, n_eff: f64) -> Result<FockOperator> {
        hamiltonian_driven_qubit_detuned(self.kerr, self.coupling, n_eff, self.qubit_minus_drive, self.dim)
    }

    /// b at Γ_q and b†b at 2Γ_Φ.
    pub fn collapse_operators(&self) -> Result<Vec<(FockOperator, f64)>> {
        Ok(vec![(annihilation(self.dim)?, self.relaxation_rate), (number_operator(self.dim)?, 2.0 * self.dephasing_rate)])
    }

    pub fn spec(&self, n_eff: f64, initial: CMatrix, times: Vec<f64>) -> Result<LindbladSpec> {
        Ok(LindbladSpec { hamiltonian: self.hamiltonian(n_eff)?, collapse: self.collapse_operators()?, initial, times })
    }
}

/// Cavity line through which the qubit is driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveLine {
    /// γ₁, s⁻¹.
    pub port_coupling: f64,
    /// γ_tot, s⁻¹.
    pub total_linewidth: f64,
    /// ν_r, Hz.
    pub cavity_frequency: f64,
    /// ν_d, Hz.
    pub drive_frequency: f64,
}

impl DriveLine {
    pub fn from_mode(mode: &CavityMode, drive_frequency: f64) -> Self {
        Self {
            port_coupling: mode.port1_coupling,
            total_linewidth: mode.total_linewidth(),
            cavity_frequency: mode.frequency,
            drive_frequency,
        }
    }

    /// n_eff for a power at the cavity port.
    pub fn n_eff(&self, port_power_w: f64) -> Result<f64> {
        effective_photon_number(
            port_power_w,
            self.port_coupling,
            self.total_linewidth,
            angular(self.drive_frequency - self.cavity_frequency),
            angular(self.cavity_frequency),
        )
    }
}

/// How a Rabi frequency was obtained from a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RabiMethod {
    Fit,
    /// Damped-sinusoid fit failed; peak of the discrete spectrum.
    Spectrum,
    /// No oscillation in the trace.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiTrace {
    /// Pulse durations, s.
    pub durations: Vec<f64>,
    pub ground_population: Vec<f64>,
    /// Extracted ν_Rabi, Hz.
    pub frequency: f64,
    pub method: RabiMethod,
}

/// Dominant oscillation frequency of P_g(Δt): damped-sinusoid fit, else
/// the spectral peak (uniform grids).
pub fn extract_rabi_frequency(durations: &[f64], population: &[f64]) -> Result<(f64, RabiMethod)> {
    let trace = Trace::new(durations.to_vec(), population.to_vec())?;
    if trace.len() >= 8 {
        let fit = fit_damped_sinusoid(&trace)?;
        if fit.converged {
            return Ok((fit.values[0], RabiMethod::Fit));
        }
    }
    let span = durations[durations.len() - 1] - durations[0];
    match spectral_peak(population) {
        Some(cycles) if span > 0.0 => Ok((cycles / span, RabiMethod::Spectrum)),
        _ => Ok((0.0, RabiMethod::None)),
    }
}

/// Ground-state population after a rectangular pulse of each duration,
/// starting from |0⟩.
pub fn rabi_experiment(qubit: &DrivenQubit, n_eff: f64, durations: &[f64]) -> Result<RabiTrace> {
    if durations.iter().any(|t| !(*t >= 0.0)) || durations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "durations", reason: "must be non-negative and strictly increasing" });
    }
    let states = lindblad_evolve(&qubit.spec(n_eff, basis_state(qubit.dim, 0)?, durations.to_vec())?)?;
    let ground_population: Vec<f64> = states.iter().map(|r| r[(0, 0)].re).collect();
    let (frequency, method) = if n_eff == 0.0 {
        (0.0, RabiMethod::None)
    } else {
        extract_rabi_frequency(durations, &ground_population)?
    };
    Ok(RabiTrace { durations: durations.to_vec(), ground_population, frequency, method })
}

/// Record length, in periods of the linear Rabi frequency 2g√n_eff.
pub const RABI_WINDOW_PERIODS: f64 = 4.0;
pub const RABI_SAMPLES: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiPoint {
    pub sqrt_n_eff: f64,
    /// Extracted ν_Rabi, Hz.
    pub frequency: f64,
    /// 2g√n_eff, Hz.
    pub linear: f64,
    pub method: RabiMethod,
}

/// One point of [`rabi_vs_amplitude`].
pub fn rabi_point(qubit: &DrivenQubit, sqrt_n_eff: f64) -> Result<RabiPoint> {
    rabi_point_with(qubit, sqrt_n_eff, RABI_WINDOW_PERIODS, RABI_SAMPLES)
}

/// [`rabi_point`] with an explicit record length (in linear Rabi periods)
/// and sample count.
pub fn rabi_point_with(qubit: &DrivenQubit, sqrt_n_eff: f64, periods: f64, samples: usize) -> Result<RabiPoint> {
    if !(sqrt_n_eff > 0.0) {
        return Err(Error::InvalidParameter { name: "sqrt_n_eff", reason: "grid must be positive" });
    }
    if !(periods > 0.0) || samples < 8 {
        return Err(Error::InvalidParameter { name: "window", reason: "needs a positive length and at least 8 samples" });
    }
    let linear = 2.0 * qubit.coupling.abs() * sqrt_n_eff;
    let window = periods / linear;
    let durations: Vec<f64> = (0..samples).map(|i| window * i as f64 / (samples - 1) as f64).collect();
    let trace = rabi_experiment(qubit, sqrt_n_eff * sqrt_n_eff, &durations)?;
    Ok(RabiPoint { sqrt_n_eff, frequency: trace.frequency, linear, method: trace.method })
}

/// Extracted Rabi frequency over a grid of √n_eff values.
pub fn rabi_vs_amplitude(qubit: &DrivenQubit, sqrt_n_eff: &[f64]) -> Result<Vec<RabiPoint>> {
    sqrt_n_eff.iter().map(|s| rabi_point(qubit, *s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiPulse {
    /// t_π, s.
    pub duration: f64,
    pub n_eff: f64,
    /// ν_Rabi the duration was derived from, Hz.
    pub rabi_frequency: f64,
}

/// t_π = 1/(2ν_Rabi) with ν_Rabi from a simulated Rabi experiment.
pub fn calibrate_pi_pulse(qubit: &DrivenQubit, n_eff: f64) -> Result<PiPulse> {
    let linear = 2.0 * qubit.coupling.abs() * n_eff.sqrt();
    if !(linear > 0.0) {
        return Err(Error::UncalibratedPulse);
    }
    let window = 4.0 / linear;
    let durations: Vec<f64> = (0..400).map(|i| window * i as f64 / 399.0).collect();
    let trace = rabi_experiment(qubit, n_eff, &durations)?;
    if !(trace.frequency > 0.0) {
        return Err(Error::UncalibratedPulse);
    }
    Ok(PiPulse { duration: 0.5 / trace.frequency, n_eff, rabi_frequency: trace.frequency })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationTrace {
    /// Delay after the π pulse, s.
    pub delays: Vec<f64>,
    pub ground_population: Vec<f64>,
}

/// π pulse from |0⟩, then free decay; P_g at each delay.
pub fn t1_experiment(qubit: &DrivenQubit, pulse: Option<&PiPulse>, delays: &[f64]) -> Result<RelaxationTrace> {
    let pulse = pulse.ok_or(Error::UncalibratedPulse)?;
    if delays.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter { name: "delays", reason: "must be non-negative" });
    }
    let excited = lindblad_evolve(&qubit.spec(pulse.n_eff, basis_state(qubit.dim, 0)?, vec![pulse.duration])?)?
        .pop()
        .expect("one output time");
    let states = lindblad_evolve(&qubit.spec(0.0, excited, delays.to_vec())?)?;
    Ok(RelaxationTrace { delays: delays.to_vec(), ground_population: states.iter().map(|r| r[(0, 0)].re).collect() })
}

/// Largest change of a reported quantity between truncation `dim` and
/// `dim + 4`.
pub fn truncation_convergence<F>(mut experiment: F, dim: usize) -> Result<f64>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let a = experiment(dim)?;
    let b = experiment(dim + 4)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::creation;
    use crate::units::MHZ;

    fn two_level(rabi_hz: f64, gamma: f64, dephasing: f64) -> (DrivenQubit, f64) {
        // g = 1 MHz, n_eff chosen to give the requested 2g√n.
        let q = DrivenQubit { coupling: MHZ, kerr: 0.0, relaxation_rate: gamma, dephasing_rate: dephasing, qubit_minus_drive: 0.0, dim: 2 };
        (q, (rabi_hz / (2.0 * MHZ)).powi(2))
    }

    #[test]
    fn pure_decay() {
        let gamma = 0.153e6;
        let b = annihilation(3).unwrap();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 1e-6).collect();
        let spec = LindbladSpec {
            hamiltonian: FockOperator::zeros(3).unwrap(),
            collapse: vec![(b, gamma)],
            initial: basis_state(3, 1).unwrap(),
            times: times.clone(),
        };
        let states = lindblad_evolve(&spec).unwrap();
        for (t, r) in times.iter().zip(&states) {
            assert!((r[(1, 1)].re - (-gamma * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn lossless_rabi_formula() {
        let (q, n) = two_level(2.0 * MHZ, 0.0, 0.0);
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 2e-8).collect();
        let states = lindblad_evolve(&q.spec(n, basis_state(2, 0).unwrap(), times.clone()).unwrap()).unwrap();
        for (t, r) in times.iter().zip(&states) {
            let want = (PI * 2.0 * MHZ * t).sin().powi(2);
            assert!((r[(1, 1)].re - want).abs() < 1e-6);
        }
    }

    #[test]
    fn trace_and_positivity_preserved() {
        let q = DrivenQubit { coupling: 210.0 * MHZ, kerr: -0.03 * MHZ, relaxation_rate: 0.153e6, dephasing_rate: 0.0765e6, qubit_minus_drive: 0.0, dim: 6 };
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 1e-6).collect();
        let states = lindblad_evolve(&q.spec(1e-8, basis_state(6, 0).unwrap(), times).unwrap()).unwrap();
        for r in &states {
            assert!((r.trace().re - 1.0).abs() < 1e-8);
            assert!(r.hermitian_eigenvalues().iter().all(|e| *e >= -1e-8));
        }
    }

    #[test]
    fn invalid_initial_states_rejected() {
        let q = two_level(MHZ, 0.0, 0.0).0;
        let mut rho = basis_state(2, 0).unwrap();
        rho[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(lindblad_evolve(&q.spec(0.0, rho, vec![1e-6]).unwrap()), Err(Error::InvalidState(_))));
        let mut neg = CMatrix::zeros(2);
        neg[(0, 0)] = Complex64::new(1.5, 0.0);
        neg[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(lindblad_evolve(&q.spec(0.0, neg, vec![1e-6]).unwrap()).is_err());
        let spec = LindbladSpec { collapse: vec![(creation(2).unwrap(), -1.0)], ..q.spec(0.0, basis_state(2, 0).unwrap(), vec![1e-6]).unwrap() };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn analytic_rabi_limits() {
        let r = rabi_frequency_analytic(210.0 * MHZ, 0.0, 0.153e6).unwrap();
        assert_eq!(r.undamped, 0.0);
        assert!(r.overdamped);
        let r = rabi_frequency_analytic(210.0 * MHZ, 1e-8, 0.0).unwrap();
        assert!((r.undamped - 42e3).abs() < 1e-6 && r.damped == r.undamped);
    }

    #[test]
    fn displacement_bookkeeping() {
        let line = DriveLine { port_coupling: angular(10e3), total_linewidth: angular(200e3), cavity_frequency: 13.45e9, drive_frequency: 12.611e9 };
        assert_eq!(line.n_eff(0.0).unwrap(), 0.0);
        let a = line.n_eff(1e-20).unwrap();
        let b = line.n_eff(4e-20).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        let resonant = DriveLine { drive_frequency: 13.45e9, ..line };
        assert_eq!(resonant.n_eff(1e-20), Err(Error::ResonantDrive));
        // 2·gγ₁ε/Δ and the power formula differ by 2γ₁/γ_tot.
        let p = 1e-20;
        let d = angular(line.drive_frequency - line.cavity_frequency);
        let wr = angular(line.cavity_frequency);
        let eps = displacement_amplitude(p, line.port_coupling, line.total_linewidth, wr);
        let coef = drive_amplitude_coefficient(210.0 * MHZ, line.port_coupling, eps, d.abs()).unwrap();
        let via_p = rabi_frequency_from_power(210.0 * MHZ, line.port_coupling, p, d, wr).unwrap();
        assert!((2.0 * coef / via_p - 2.0 * line.port_coupling / line.total_linewidth).abs() < 1e-12);
    }

    #[test]
    fn zero_drive_keeps_ground_state() {
        let q = DrivenQubit { coupling: 210.0 * MHZ, kerr: -0.03 * MHZ, relaxation_rate: 0.153e6, dephasing_rate: 0.0765e6, qubit_minus_drive: 0.0, dim: 4 };
        let durations: Vec<f64> = (0..30).map(|i| i as f64 * 1e-7).collect();
        let t = rabi_experiment(&q, 0.0, &durations).unwrap();
        assert!(t.ground_population.iter().all(|p| (p - 1.0).abs() < 1e-12));
        assert_eq!(t.method, RabiMethod::None);
    }

    #[test]
    fn t1_needs_calibration() {
        let (q, _) = two_level(5.0 * MHZ, 0.153e6, 0.0);
        assert_eq!(t1_experiment(&q, None, &[0.0]), Err(Error::UncalibratedPulse));
    }
}
