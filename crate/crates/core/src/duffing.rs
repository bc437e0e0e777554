//! Semiclassical steady state of a driven Kerr (Duffing) resonator.
//!
//! With detuning δ = ω_d − ω'_r, total linewidth γ, Kerr coefficient K and
//! drive rate F = γ₁P/(ħω_r), the intracavity photon number n solves
//!
//! ```text
//! n [(δ − K n)² + (γ/2)²] = F
//! ```
//!
//! Internally the cubic is solved in the scaled variables x = δ/γ,
//! u = K n/γ and p = K F/γ³, where it reads u[(x − u)² + 1/4] = p.

use alloc::vec::Vec;

use num_complex::Complex64;

#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::cubic::{brent, cubic_roots};
use crate::device::{CavityMode, SystemModel};
use crate::error::{Error, Result};
use crate::units::{angular, attenuated_watts, HBAR};

/// Driven Kerr resonator in angular units (s⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrResonator {
    /// γ_tot, s⁻¹.
    pub linewidth: f64,
    /// K, rad/s per photon.
    pub kerr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub photons: f64,
    pub stable: bool,
}

/// One to three steady states, ascending in photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStates {
    states: [SteadyState; 3],
    len: usize,
}

impl SteadyStates {
    pub fn as_slice(&self) -> &[SteadyState] {
        &self.states[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn stable(&self) -> impl Iterator<Item = &SteadyState> {
        self.as_slice().iter().filter(|s| s.stable)
    }

    pub fn is_bistable(&self) -> bool {
        self.stable().count() > 1
    }
}

impl KerrResonator {
    pub fn new(linewidth: f64, kerr: f64) -> Result<Self> {
        if !(linewidth > 0.0 && linewidth.is_finite()) {
            return Err(Error::InvalidParameter { name: "linewidth", reason: "total linewidth must be positive" });
        }
        if !kerr.is_finite() {
            return Err(Error::InvalidParameter { name: "kerr", reason: "must be finite" });
        }
        Ok(Self { linewidth, kerr })
    }

    /// Left-hand side n[(δ − K n)² + (γ/2)²].
    pub fn response(&self, photons: f64, detuning: f64) -> f64 {
        let d = detuning - self.kerr * photons;
        photons * (d * d + 0.25 * self.linewidth * self.linewidth)
    }

    /// d(response)/dn; negative on the unstable middle branch.
    pub fn response_slope(&self, photons: f64, detuning: f64) -> f64 {
        let k = self.kerr;
        3.0 * k * k * photons * photons - 4.0 * detuning * k * photons + detuning * detuning + 0.25 * self.linewidth * self.linewidth
    }

    /// Linear (K = 0) Lorentzian response F/(δ² + γ²/4).
    pub fn linear_photons(&self, detuning: f64, drive_rate: f64) -> f64 {
        drive_rate / (detuning * detuning + 0.25 * self.linewidth * self.linewidth)
    }

    /// Steady states at detuning δ (rad/s) for drive rate F (s⁻²).
    pub fn steady_states(&self, detuning: f64, drive_rate: f64) -> SteadyStates {
        let mut out = SteadyStates { states: [SteadyState { photons: 0.0, stable: true }; 3], len: 0 };
        if drive_rate <= 0.0 {
            out.len = 1;
            return out;
        }
        if self.kerr == 0.0 {
            out.states[0].photons = self.linear_photons(detuning, drive_rate);
            out.len = 1;
            return out;
        }
        let g = self.linewidth;
        let x = detuning / g;
        let p = self.kerr * drive_rate / (g * g * g);
        let roots = cubic_roots(1.0, -2.0 * x, x * x + 0.25, -p);
        for &u in roots.as_slice() {
            // u carries the sign of K for physical (n > 0) roots.
            if u * self.kerr.signum() <= 0.0 {
                continue;
            }
            let slope = 3.0 * u * u - 4.0 * x * u + x * x + 0.25;
            out.states[out.len] = SteadyState { photons: u * g / self.kerr, stable: slope > 0.0 };
            out.len += 1;
        }
        out.states[..out.len]
            .sort_by(|a, b| a.photons.partial_cmp(&b.photons).unwrap_or(core::cmp::Ordering::Equal));
        out
    }

    /// Drive rate above which a bistable window exists, F_c = γ³/(3√3|K|).
    pub fn bistability_threshold(&self) -> f64 {
        if self.kerr == 0.0 {
            return f64::INFINITY;
        }
        self.linewidth.powi(3) / (3.0 * 3f64.sqrt() * self.kerr.abs())
    }

    /// Detuning interval (rad/s) with three steady states, found from the
    /// zeros of the cubic discriminant.
    pub fn bistable_window(&self, drive_rate: f64) -> Option<(f64, f64)> {
        if self.kerr == 0.0 || drive_rate <= 0.0 {
            return None;
        }
        let g = self.linewidth;
        let p = self.kerr * drive_rate / (g * g * g);
        let (lo, hi) = scaled_window(p.abs())?;
        if p > 0.0 {
            Some((lo * g, hi * g))
        } else {
            Some((-hi * g, -lo * g))
        }
    }
}

/// Scaled discriminant q(x) for p > 0; positive inside the bistable window.
fn discriminant(x: f64, p: f64) -> f64 {
    let c = x * x + 0.25;
    -c * c + 4.0 * p * x * x * x + 9.0 * p * x - 27.0 * p * p
}

fn scaled_window(p: f64) -> Option<(f64, f64)> {
    // Stationary points of q solve −4x³ + 12p x² − x + 9p = 0.
    let stationary = cubic_roots(-4.0, 12.0 * p, -1.0, 9.0 * p);
    let peak = stationary
        .as_slice()
        .iter()
        .copied()
        .filter(|x| *x > 0.0)
        .max_by(|a, b| discriminant(*a, p).partial_cmp(&discriminant(*b, p)).unwrap_or(core::cmp::Ordering::Equal))?;
    if discriminant(peak, p) <= 0.0 {
        return None;
    }
    let mut far = (4.0 * p + 2.0).max(2.0 * peak);
    while discriminant(far, p) >= 0.0 {
        far *= 2.0;
    }
    let f = |x: f64| discriminant(x, p);
    let lo = brent(f, 0.0, peak, 1e-14).ok()?;
    let hi = brent(f, peak, far, 1e-14).ok()?;
    Some((lo, hi))
}

/// A microwave tone: source power travels through a line with
/// `line_attenuation_db` (≤ 0) before reaching the cavity port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTone {
    /// Hz.
    pub frequency: f64,
    /// dBm before the line.
    pub power_dbm: f64,
    /// dB, negative.
    pub line_attenuation_db: f64,
}

impl DriveTone {
    pub fn new(frequency: f64, power_dbm: f64, line_attenuation_db: f64) -> Result<Self> {
        if line_attenuation_db > 0.0 {
            return Err(Error::InvalidParameter { name: "line_attenuation_db", reason: "attenuation is expressed as a negative number" });
        }
        Ok(Self { frequency, power_dbm, line_attenuation_db })
    }

    /// Tone defined by the power reaching the port.
    pub fn at_port(frequency: f64, power_dbm: f64) -> Self {
        Self { frequency, power_dbm, line_attenuation_db: 0.0 }
    }

    pub fn port_power_dbm(&self) -> f64 {
        self.power_dbm + self.line_attenuation_db
    }

    pub fn port_power_watts(&self) -> f64 {
        attenuated_watts(self.power_dbm, self.line_attenuation_db)
    }
}

/// F = γ₁ P / (ħ ω_r): in the linear limit on resonance n = 4γ₁P/(ħω_r γ²).
pub fn drive_rate(mode: &CavityMode, port_power_w: f64) -> f64 {
    mode.port1_coupling * port_power_w / (HBAR * mode.angular_frequency())
}

fn resonator(mode: &CavityMode, kerr_hz: f64) -> Result<KerrResonator> {
    KerrResonator::new(mode.total_linewidth(), angular(kerr_hz))
}

/// Steady-state photon numbers of `mode` (its frequency taken as the
/// dressed ν'_r) under `drive`, with effective Kerr K_eff/2π in Hz.
pub fn steady_state_roots(mode: &CavityMode, kerr_hz: f64, drive: &DriveTone) -> Result<SteadyStates> {
    let res = resonator(mode, kerr_hz)?;
    let detuning = angular(drive.frequency - mode.frequency);
    Ok(res.steady_states(detuning, drive_rate(mode, drive.port_power_watts())))
}

/// Complex transmission √(γ₁γ₂)/(γ/2 − i(δ − K n)).
pub fn transmission(mode: &CavityMode, kerr: f64, detuning: f64, photons: f64) -> Complex64 {
    let num = (mode.port1_coupling * mode.port2_coupling).sqrt();
    num / Complex64::new(0.5 * mode.total_linewidth(), -(detuning - kerr * photons))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Ascending,
    Descending,
}

/// Which steady state a sweep point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Only one steady state exists.
    Unique = 0,
    Lower = 1,
    Upper = 2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub frequency: f64,
    pub photons: f64,
    pub s21: Complex64,
    pub branch: Branch,
}

fn check_grid(freqs: &[f64]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::InvalidTrace("empty frequency grid"));
    }
    if freqs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTrace("frequency grid must be strictly increasing"));
    }
    Ok(())
}

/// |S21| sweep following the stable branch by continuation.
///
/// `freqs` is strictly increasing; points are returned in sweep order.
/// `port_power_dbm` is the power reaching the cavity port.
pub fn transmission_sweep(
    mode: &CavityMode,
    kerr_hz: f64,
    port_power_dbm: f64,
    freqs: &[f64],
    direction: SweepDirection,
) -> Result<Vec<SweepPoint>> {
    check_grid(freqs)?;
    let res = resonator(mode, kerr_hz)?;
    let f_drive = drive_rate(mode, crate::units::dbm_to_watts(port_power_dbm));
    let order: Vec<usize> = match direction {
        SweepDirection::Ascending => (0..freqs.len()).collect(),
        SweepDirection::Descending => (0..freqs.len()).rev().collect(),
    };
    let mut out = Vec::with_capacity(freqs.len());
    let mut prev: Option<(f64, Branch)> = None;
    for i in order {
        let detuning = angular(freqs[i] - mode.frequency);
        let states = res.steady_states(detuning, f_drive);
        let stable: Vec<f64> = states.stable().map(|s| s.photons).collect();
        let (photons, branch) = if stable.len() <= 1 {
            let n = stable.first().copied().unwrap_or_else(|| states.as_slice()[0].photons);
            (n, Branch::Unique)
        } else {
            let (lower, upper) = (stable[0], stable[stable.len() - 1]);
            let pick_upper = match prev {
                None => false,
                Some((_, Branch::Upper)) => true,
                Some((_, Branch::Lower)) => false,
                Some((n_prev, Branch::Unique)) => (upper - n_prev).abs() < (lower - n_prev).abs(),
            };
            if pick_upper {
                (upper, Branch::Upper)
            } else {
                (lower, Branch::Lower)
            }
        };
        prev = Some((photons, branch));
        out.push(SweepPoint { frequency: freqs[i], photons, s21: transmission(mode, res.kerr, detuning, photons), branch });
    }
    Ok(out)
}

/// Ascending minus descending |S21| on a power × frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisMap {
    pub powers_dbm: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `difference[i][j]` at power i, frequency j.
    pub difference: Vec<Vec<f64>>,
}

pub fn hysteresis_map(mode: &CavityMode, kerr_hz: f64, powers_dbm: &[f64], freqs: &[f64]) -> Result<HysteresisMap> {
    check_grid(freqs)?;
    if powers_dbm.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTrace("power grid must be strictly increasing"));
    }
    let mut difference = Vec::with_capacity(powers_dbm.len());
    for &p in powers_dbm {
        let up = transmission_sweep(mode, kerr_hz, p, freqs, SweepDirection::Ascending)?;
        let mut down = transmission_sweep(mode, kerr_hz, p, freqs, SweepDirection::Descending)?;
        down.reverse();
        difference.push(up.iter().zip(&down).map(|(a, b)| a.s21.norm() - b.s21.norm()).collect());
    }
    Ok(HysteresisMap { powers_dbm: powers_dbm.to_vec(), frequencies: freqs.to_vec(), difference })
}

/// Two-tone spectroscopy point: qubit population and readout response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTonePoint {
    pub drive_frequency: f64,
    pub drive_amplitude: f64,
    pub qubit_photons: f64,
    pub dressed_cavity: f64,
    pub s21: Complex64,
}

/// Drive-frequency × drive-amplitude map of the readout transmission.
///
/// The qubit is treated as a driven Kerr oscillator (K = α, linewidth
/// Γ_q + 2Γ_Φ) whose steady excitation n_b shifts the cavity through the
/// dressed-frequency relation; the readout tone probes the linear cavity.
/// `drive_amplitudes` are g√n_eff in Hz.
pub fn two_tone_map(
    system: &SystemModel,
    readout_mode: usize,
    readout_frequency: f64,
    drive_freqs: &[f64],
    drive_amplitudes: &[f64],
) -> Result<Vec<Vec<TwoTonePoint>>> {
    let mode = system.mode(readout_mode)?;
    let q = system.qubit;
    let qubit = KerrResonator::new((q.relaxation_rate + 2.0 * q.dephasing_rate).max(1e-3), angular(q.anharmonicity))?;
    let mut rows = Vec::with_capacity(drive_amplitudes.len());
    for &amp in drive_amplitudes {
        let f = angular(amp).powi(2);
        let mut row = Vec::with_capacity(drive_freqs.len());
        for &fd in drive_freqs {
            let states = qubit.steady_states(angular(fd - q.frequency), f);
            let nb = states.stable().map(|s| s.photons).next().unwrap_or(0.0);
            let (dressed, _) = system.dressed_frequencies(readout_mode, nb)?;
            let s21 = transmission(mode, 0.0, angular(readout_frequency - dressed), 0.0);
            row.push(TwoTonePoint { drive_frequency: fd, drive_amplitude: amp, qubit_photons: nb, dressed_cavity: dressed, s21 });
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::KHZ;

    fn mode() -> CavityMode {
        CavityMode::new("TM110", 7.1873e9, angular(26.5 * KHZ), angular(26.5 * KHZ), 1.0).unwrap()
    }

    /// Count positive roots of response(n) − F by a dense logarithmic scan.
    fn scan_root_count(res: &KerrResonator, detuning: f64, f: f64, n_max: f64) -> usize {
        let steps = 20_000;
        let mut count = 0;
        let mut prev = res.response(0.0, detuning) - f;
        for k in 1..=steps {
            let n = n_max * (k as f64 / steps as f64).powi(3);
            let v = res.response(n, detuning) - f;
            if v.signum() != prev.signum() {
                count += 1;
            }
            prev = v;
        }
        count
    }

    #[test]
    fn linear_cavity_is_lorentzian() {
        let res = KerrResonator::new(angular(53.0 * KHZ), 0.0).unwrap();
        let f = 1e9;
        let peak = res.steady_states(0.0, f).as_slice()[0].photons;
        let half = res.steady_states(0.5 * res.linewidth, f).as_slice()[0].photons;
        assert!((half / peak - 0.5).abs() < 1e-14);
        assert_eq!(res.steady_states(1e5, f).len(), 1);
    }

    #[test]
    fn roots_satisfy_the_cubic() {
        let res = KerrResonator::new(angular(53.0 * KHZ), -angular(0.5)).unwrap();
        let f = 50.0 * res.bistability_threshold();
        for k in -200..=50 {
            let det = k as f64 * 0.05 * res.linewidth;
            for s in res.steady_states(det, f).as_slice() {
                let r = (res.response(s.photons, det) - f).abs() / f;
                assert!(r < 1e-9, "residual {r} at det {det}");
            }
        }
    }

    #[test]
    fn softening_peak_sits_below_resonance() {
        let res = KerrResonator::new(angular(53.0 * KHZ), -angular(0.5)).unwrap();
        let f = 20.0 * res.bistability_threshold();
        let (mut best, mut best_n) = (0.0, 0.0);
        for k in -400..=400 {
            let det = k as f64 * 0.02 * res.linewidth;
            for s in res.steady_states(det, f).stable() {
                if s.photons > best_n {
                    best_n = s.photons;
                    best = det;
                }
            }
        }
        assert!(best < 0.0);
    }

    #[test]
    fn discriminant_window_matches_scan() {
        let res = KerrResonator::new(angular(53.0 * KHZ), -angular(0.5)).unwrap();
        let f = 10.0 * res.bistability_threshold();
        let (lo, hi) = res.bistable_window(f).unwrap();
        assert!(lo < hi && hi < 0.0);
        let n_max = 4.0 * f / (0.25 * res.linewidth.powi(2));
        let inside = 0.5 * (lo + hi);
        assert_eq!(scan_root_count(&res, inside, f, n_max), 3);
        assert_eq!(res.steady_states(inside, f).len(), 3);
        let eps = 1e-3 * (hi - lo);
        assert_eq!(scan_root_count(&res, lo - eps, f, n_max), 1);
        assert_eq!(scan_root_count(&res, hi + eps, f, n_max), 1);
        assert_eq!(res.steady_states(lo + eps, f).len(), 3);
        assert_eq!(res.steady_states(hi - eps, f).len(), 3);
    }

    #[test]
    fn threshold_separates_bistability() {
        let res = KerrResonator::new(angular(53.0 * KHZ), angular(0.5)).unwrap();
        let fc = res.bistability_threshold();
        assert!(res.bistable_window(0.95 * fc).is_none());
        assert!(res.bistable_window(1.05 * fc).is_some());
    }

    #[test]
    fn mirror_symmetry() {
        let soft = KerrResonator::new(angular(53.0 * KHZ), -angular(0.5)).unwrap();
        let hard = KerrResonator::new(angular(53.0 * KHZ), angular(0.5)).unwrap();
        let f = 10.0 * soft.bistability_threshold();
        for k in -100..=100 {
            let det = k as f64 * 0.07 * soft.linewidth;
            let a = soft.steady_states(det, f);
            let b = hard.steady_states(-det, f);
            assert_eq!(a.len(), b.len());
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x.photons - y.photons).abs() <= 1e-9 * x.photons.max(1.0));
                assert_eq!(x.stable, y.stable);
                // direct substitution of the mirrored solution
                assert!((hard.response(x.photons, -det) - f).abs() < 1e-9 * f);
            }
        }
        let (lo, hi) = soft.bistable_window(f).unwrap();
        let (lo2, hi2) = hard.bistable_window(f).unwrap();
        assert!((lo + hi2).abs() < 1e-6 * hi2.abs() && (hi + lo2).abs() < 1e-6 * lo2.abs());
    }

    #[test]
    fn sweep_requires_increasing_grid() {
        let m = mode();
        assert!(transmission_sweep(&m, -0.5, -100.0, &[2.0, 1.0], SweepDirection::Ascending).is_err());
        assert!(transmission_sweep(&m, -0.5, -100.0, &[], SweepDirection::Ascending).is_err());
    }

    #[test]
    fn drive_tone_attenuation() {
        let t = DriveTone::new(7e9, -10.0, -85.0).unwrap();
        assert_eq!(t.port_power_dbm(), -95.0);
        assert!(DriveTone::new(7e9, -10.0, 5.0).is_err());
    }

    #[test]
    fn linear_limit_matches_cavity_occupation() {
        // On resonance n = 4γ₁P/(ħω_r γ²).
        let m = mode();
        let p = 1e-18;
        let s = steady_state_roots(&m, 0.0, &DriveTone::at_port(m.frequency, crate::units::watts_to_dbm(p))).unwrap();
        let want = 4.0 * m.port1_coupling * p / (HBAR * m.angular_frequency() * m.total_linewidth().powi(2));
        assert!((s.as_slice()[0].photons / want - 1.0).abs() < 1e-9);
    }
}
