//! Parameter extraction: resonance, coupling, Kerr, T1 and Rabi fits, and
//! the thermal-photon estimate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::error::{Error, Result};
use crate::lm::{levenberg_marquardt, LmOptions, LmOutcome, Model};
use crate::units::{angular, attenuated_watts, BOLTZMANN, HBAR, PLANCK};

/// Sampled data y(x) with strictly monotone x.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    x: Vec<f64>,
    y: Vec<f64>,
    sigma: Option<Vec<f64>>,
}

impl Trace {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidTrace("x and y lengths differ"));
        }
        let up = x.windows(2).all(|w| w[1] > w[0]);
        let down = x.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidTrace("x must be strictly monotone"));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrace("non-finite sample"));
        }
        Ok(Self { x, y, sigma: None })
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.x.len() {
            return Err(Error::InvalidTrace("sigma length differs"));
        }
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidTrace("sigma must be positive"));
        }
        self.sigma = Some(sigma);
        Ok(self)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn sigma(&self) -> Option<&[f64]> {
        self.sigma.as_deref()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn weights(&self) -> Option<Vec<f64>> {
        self.sigma.as_ref().map(|s| s.iter().map(|v| 1.0 / (v * v)).collect())
    }
}

/// Non-fatal conditions attached to a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWarning {
    /// Dressed-frequency slope has the wrong sign for a real coupling.
    SignError,
    /// sign(K_a) ≠ sign(α).
    SignMismatch,
    /// Fewer than two oscillation periods in the record.
    UnderResolved,
    /// Fitted centre outside the sampled range.
    OutOfRange,
    /// No feature to fit.
    NoSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
    /// 1σ.
    pub uncertainties: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.values[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|i| self.uncertainties[i])
    }

    pub fn has_warning(&self, w: FitWarning) -> bool {
        self.warnings.contains(&w)
    }

    fn failed(names: Vec<&'static str>, warning: FitWarning) -> Self {
        let n = names.len();
        Self {
            names,
            values: vec![f64::NAN; n],
            uncertainties: vec![f64::NAN; n],
            residual_norm: f64::NAN,
            converged: false,
            iterations: 0,
            warnings: vec![warning],
        }
    }
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_sigma: f64,
    pub intercept_sigma: f64,
    pub residual_norm: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::InvalidTrace("x and y lengths differ"));
    }
    if n < 2 {
        return Err(Error::InvalidTrace("a line needs at least two points"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidTrace("x values are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let var = if n > 2 { rss / (nf - 2.0) } else { 0.0 };
    Ok(LinearFit {
        slope,
        intercept,
        slope_sigma: (var / sxx).sqrt(),
        intercept_sigma: (var * (1.0 / nf + mx * mx / sxx)).sqrt(),
        residual_norm: rss.sqrt(),
    })
}

fn from_outcome(names: Vec<&'static str>, out: LmOutcome) -> FitResult {
    FitResult {
        names,
        values: out.params,
        uncertainties: out.uncertainties,
        residual_norm: out.residual_norm,
        converged: out.converged,
        iterations: out.iterations,
        warnings: Vec::new(),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn has_signal(y: &[f64]) -> bool {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE)
}

/// y = A / (1 + (2(x − f0)/w)²) + c with x measured from `centre`.
struct Lorentzian;

impl Model for Lorentzian {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let z = 2.0 * (x - p[0]) / p[1];
        p[2] / (1.0 + z * z) + p[3]
    }

    fn gradient(&self, x: f64, p: &[f64], g: &mut [f64]) {
        let z = 2.0 * (x - p[0]) / p[1];
        let d = 1.0 + z * z;
        g[0] = p[2] * 4.0 * z / (p[1] * d * d);
        g[1] = p[2] * 2.0 * z * z / (p[1] * d * d);
        g[2] = 1.0 / d;
        g[3] = 1.0;
    }
}

/// Lorentzian peak (or dip) fit; values `center` [Hz], `fwhm` [Hz],
/// `amplitude`, `offset`.
pub fn fit_lorentzian(trace: &Trace) -> Result<FitResult> {
    let names = vec!["center", "fwhm", "amplitude", "offset"];
    let n = trace.len();
    if n < 8 {
        return Err(Error::InvalidTrace("a Lorentzian fit needs at least 8 points"));
    }
    if !has_signal(trace.y()) {
        return Ok(FitResult::failed(names, FitWarning::NoSignal));
    }
    let centre = 0.5 * (trace.x[0] + trace.x[n - 1]);
    let xs: Vec<f64> = trace.x.iter().map(|x| x - centre).collect();
    let ys = &trace.y;
    let edge = (n / 10).max(1);
    let offset = 0.5 * (mean(&ys[..edge]) + mean(&ys[n - edge..]));
    let (peak, _) = ys
        .iter()
        .enumerate()
        .map(|(i, y)| (i, (y - offset).abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let amplitude = ys[peak] - offset;
    let half = |i: usize| (ys[i] - offset).abs() >= 0.5 * amplitude.abs();
    let mut lo = peak;
    while lo > 0 && half(lo - 1) {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < n && half(hi + 1) {
        hi += 1;
    }
    let span = (xs[n - 1] - xs[0]).abs();
    let mut width = (xs[hi] - xs[lo]).abs();
    if width == 0.0 {
        width = span / n as f64;
    }
    let init = [xs[peak], width, amplitude, offset];
    let w = trace.weights();
    let out = levenberg_marquardt(&Lorentzian, &xs, ys, w.as_deref(), &init, LmOptions::default());
    let mut fit = from_outcome(names, out);
    fit.values[0] += centre;
    fit.values[1] = fit.values[1].abs();
    let (xmin, xmax) = (trace.x[0].min(trace.x[n - 1]), trace.x[0].max(trace.x[n - 1]));
    if !(fit.values[0] >= xmin && fit.values[0] <= xmax) {
        fit.converged = false;
        fit.warnings.push(FitWarning::OutOfRange);
    }
    Ok(fit)
}

/// g from dressed (ν'_q, ν'_r) pairs: the slope m of ν'_r against ν'_q gives
/// g = √(−m Δ(Δ − α)/4). Δ = ν_q − ν_r and α in Hz. Values `coupling`
/// [Hz] and `slope`.
pub fn fit_coupling_from_dressed(pairs: &[(f64, f64)], detuning: f64, anharmonicity: f64) -> Result<FitResult> {
    if pairs.len() < 3 {
        return Err(Error::InvalidTrace("a coupling fit needs at least 3 pairs"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    // Shifting the anchors does not change the slope; centring keeps the
    // sums well conditioned.
    let (mx, my) = (mean(&xs), mean(&ys));
    let xs: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let ys: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let line = linear_fit(&xs, &ys)?;
    let factor = detuning * (detuning - anharmonicity) / 4.0;
    let g_sq = -line.slope * factor;
    let g = g_sq.abs().sqrt();
    let sigma = if g > 0.0 { factor.abs() * line.slope_sigma / (2.0 * g) } else { f64::INFINITY };
    let mut warnings = Vec::new();
    if g_sq < 0.0 {
        warnings.push(FitWarning::SignError);
    }
    Ok(FitResult {
        names: vec!["coupling", "slope"],
        values: vec![g, line.slope],
        uncertainties: vec![sigma, line.slope_sigma],
        residual_norm: line.residual_norm,
        converged: g_sq >= 0.0,
        iterations: 1,
        warnings,
    })
}

/// Inputs of the self-Kerr fit besides the trace itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrFitSetup {
    /// γ used in n = P/(γħω_r), s⁻¹.
    pub linewidth: f64,
    /// ν_r, Hz.
    pub cavity_frequency: f64,
    /// Line attenuation in dB (negative), added to the source power.
    pub attenuation_db: f64,
    /// α/2π, Hz.
    pub anharmonicity: f64,
    /// Δ/2π, Hz.
    pub detuning: f64,
}

/// Photon number of a critically coupled cavity for a source power in dBm.
pub fn photons_from_source_power(setup: &KerrFitSetup, source_dbm: f64) -> f64 {
    attenuated_watts(source_dbm, setup.attenuation_db) / (setup.linewidth * HBAR * angular(setup.cavity_frequency))
}

/// Self-Kerr K_a from resonance frequency versus source power (x in dBm,
/// y in Hz), using ν'_r = ν_r + (K_a/2) n, then g = |Δ|·|K_a/α|^{1/4}.
/// Values `self_kerr` [Hz], `bare_frequency` [Hz], `coupling` [Hz].
pub fn fit_self_kerr(trace: &Trace, setup: &KerrFitSetup) -> Result<FitResult> {
    if trace.len() < 2 {
        return Err(Error::InvalidTrace("a Kerr fit needs at least 2 points"));
    }
    if setup.anharmonicity == 0.0 {
        return Err(Error::InvalidParameter { name: "anharmonicity", reason: "must be non-zero to invert the Kerr relation" });
    }
    let n: Vec<f64> = trace.x().iter().map(|p| photons_from_source_power(setup, *p)).collect();
    let f0 = trace.y()[0];
    let ys: Vec<f64> = trace.y().iter().map(|y| y - f0).collect();
    let line = linear_fit(&n, &ys)?;
    let kerr = 2.0 * line.slope;
    let kerr_sigma = 2.0 * line.slope_sigma;
    let ratio = (kerr / setup.anharmonicity).abs();
    let g = setup.detuning.abs() * ratio.powf(0.25);
    let g_sigma = if kerr != 0.0 { 0.25 * g * kerr_sigma / kerr.abs() } else { 0.0 };
    let mut warnings = Vec::new();
    if kerr != 0.0 && kerr.signum() != setup.anharmonicity.signum() {
        warnings.push(FitWarning::SignMismatch);
    }
    Ok(FitResult {
        names: vec!["self_kerr", "bare_frequency", "coupling"],
        values: vec![kerr, line.intercept + f0, g],
        uncertainties: vec![kerr_sigma, line.intercept_sigma, g_sigma],
        residual_norm: line.residual_norm,
        converged: true,
        iterations: 1,
        warnings,
    })
}

/// y = c − A e^{−t/τ} on normalised time.
struct Recovery;

impl Model for Recovery {
    fn n_params(&self) -> usize {
        3
    }

    fn eval(&self, t: f64, p: &[f64]) -> f64 {
        p[2] - p[1] * (-t / p[0]).exp()
    }

    fn gradient(&self, t: f64, p: &[f64], g: &mut [f64]) {
        let e = (-t / p[0]).exp();
        g[0] = -p[1] * e * t / (p[0] * p[0]);
        g[1] = -e;
        g[2] = 1.0;
    }
}

/// P(t) = c − A e^{−t/T1}; values `t1` [s], `amplitude`, `offset`.
pub fn fit_exponential(trace: &Trace) -> Result<FitResult> {
    let names = vec!["t1", "amplitude", "offset"];
    let n = trace.len();
    if n < 6 {
        return Err(Error::InvalidTrace("an exponential fit needs at least 6 points"));
    }
    if !has_signal(trace.y()) {
        return Ok(FitResult::failed(names, FitWarning::NoSignal));
    }
    let scale = trace.x.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let ts: Vec<f64> = trace.x.iter().map(|t| t / scale).collect();
    let ys = &trace.y;
    let (first, last) = if ts[0] < ts[n - 1] { (0, n - 1) } else { (n - 1, 0) };
    let tail = (n / 5).max(1);
    let offset = if first == 0 { mean(&ys[n - tail..]) } else { mean(&ys[..tail]) };
    let amplitude = offset - ys[first];
    // First sample that has recovered by 1 − 1/e.
    let mut tau = 0.3 * (ts[last] - ts[first]).abs();
    let mut order: Vec<usize> = (0..n).collect();
    if first != 0 {
        order.reverse();
    }
    for &i in &order {
        if (offset - ys[i]) / amplitude < 1.0 / core::f64::consts::E {
            tau = (ts[i] - ts[first]).abs().max(1e-3);
            break;
        }
    }
    let w = trace.weights();
    let out = levenberg_marquardt(&Recovery, &ts, ys, w.as_deref(), &[tau, amplitude, offset], LmOptions::default());
    let mut fit = from_outcome(names, out);
    fit.values[0] *= scale;
    fit.uncertainties[0] *= scale;
    if !(fit.values[0] > 0.0) {
        fit.converged = false;
    }
    Ok(fit)
}

/// y = A e^{−Λs} cos(2πF s + φ) + c on normalised time s ∈ [0, 1].
struct DampedCosine;

impl Model for DampedCosine {
    fn n_params(&self) -> usize {
        5
    }

    fn eval(&self, s: f64, p: &[f64]) -> f64 {
        p[3] * (-p[1] * s).exp() * (2.0 * PI * p[0] * s + p[2]).cos() + p[4]
    }

    fn gradient(&self, s: f64, p: &[f64], g: &mut [f64]) {
        let e = (-p[1] * s).exp();
        let th = 2.0 * PI * p[0] * s + p[2];
        let (sn, cs) = th.sin_cos();
        g[0] = -p[3] * e * sn * 2.0 * PI * s;
        g[1] = -s * p[3] * e * cs;
        g[2] = -p[3] * e * sn;
        g[3] = e * cs;
        g[4] = 1.0;
    }
}

/// Least-squares (a, b, c) for y ≈ e^{−Λs}(a cos 2πFs + b sin 2πFs) + c.
fn linear_damped(ss: &[f64], ys: &[f64], f: f64, lambda: f64) -> Option<([f64; 3], f64)> {
    let mut ata = crate::linalg::RealMatrix::zeros(3, 3);
    let mut aty = [0.0; 3];
    for (&s, &y) in ss.iter().zip(ys) {
        let e = (-lambda * s).exp();
        let (sn, cs) = (2.0 * PI * f * s).sin_cos();
        let row = [e * cs, e * sn, 1.0];
        for i in 0..3 {
            aty[i] += row[i] * y;
            for j in 0..3 {
                ata[(i, j)] += row[i] * row[j];
            }
        }
    }
    let c = ata.solve(&aty)?;
    let rss = ss
        .iter()
        .zip(ys)
        .map(|(&s, &y)| {
            let e = (-lambda * s).exp();
            let (sn, cs) = (2.0 * PI * f * s).sin_cos();
            (y - e * (c[0] * cs + c[1] * sn) - c[2]).powi(2)
        })
        .sum();
    Some(([c[0], c[1], c[2]], rss))
}

/// Peak of the (zero-padded) discrete spectrum of a uniformly sampled
/// record, in cycles per record. `None` when the record has no oscillating
/// component.
pub fn spectral_peak(ys: &[f64]) -> Option<f64> {
    let n = ys.len();
    if n < 4 {
        return None;
    }
    let m = mean(ys);
    let denom = (n - 1) as f64;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, y) in ys.iter().enumerate() {
            let (sn, cs) = (2.0 * PI * f * i as f64 / denom).sin_cos();
            re += (y - m) * cs;
            im -= (y - m) * sn;
        }
        re * re + im * im
    };
    let nyquist = 0.5 * denom;
    let step = 0.05;
    let mut best = (0.0, 0.0);
    let mut f = 0.5;
    while f <= nyquist {
        let p = power(f);
        if p > best.1 {
            best = (f, p);
        }
        f += step;
    }
    if best.1 == 0.0 {
        return None;
    }
    // Parabolic refinement on the fine grid.
    let (f0, p0) = best;
    let (pl, pr) = (power(f0 - step), power(f0 + step));
    let curv = pl - 2.0 * p0 + pr;
    let shift = if curv < 0.0 { 0.5 * (pl - pr) / curv * step } else { 0.0 };
    Some(f0 + shift.clamp(-step, step))
}

/// Damped cosine y = A e^{−λt} cos(2πft + φ) + c; values `frequency` [Hz],
/// `decay` [s⁻¹], `phase` [rad], `amplitude`, `offset`. Phase and
/// amplitude refer to t = 0.
pub fn fit_damped_sinusoid(trace: &Trace) -> Result<FitResult> {
    let names = vec!["frequency", "decay", "phase", "amplitude", "offset"];
    let n = trace.len();
    if n < 8 {
        return Err(Error::InvalidTrace("a sinusoid fit needs at least 8 points"));
    }
    if !has_signal(trace.y()) {
        return Ok(FitResult::failed(names, FitWarning::NoSignal));
    }
    let t0 = trace.x[0];
    let span = trace.x[n - 1] - t0;
    let ss: Vec<f64> = trace.x.iter().map(|t| (t - t0) / span).collect();
    let ys = &trace.y;
    let Some(peak) = spectral_peak(ys) else {
        return Ok(FitResult::failed(names, FitWarning::NoSignal));
    };
    // Coarse joint search in (F, Λ) with the linear parameters eliminated.
    let mut best: Option<(f64, f64, [f64; 3], f64)> = None;
    for i in 0..=40 {
        let f = (peak - 1.0 + 0.05 * i as f64).max(0.05);
        for &lambda in &[0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0] {
            if let Some((c, rss)) = linear_damped(&ss, ys, f, lambda) {
                if best.is_none_or(|b| rss < b.3) {
                    best = Some((f, lambda, c, rss));
                }
            }
        }
    }
    let Some((f, lambda, c, _)) = best else {
        return Ok(FitResult::failed(names, FitWarning::NoSignal));
    };
    let amp = (c[0] * c[0] + c[1] * c[1]).sqrt();
    let phase = (-c[1]).atan2(c[0]);
    let w = trace.weights();
    let out = levenberg_marquardt(&DampedCosine, &ss, ys, w.as_deref(), &[f, lambda, phase, amp, c[2]], LmOptions::default());
    let mut fit = from_outcome(names, out);
    let p = &mut fit.values;
    if p[3] < 0.0 {
        p[3] = -p[3];
        p[2] += PI;
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[2] = -p[2];
    }
    let cycles = p[0];
    // Back to physical units, referenced to t = 0.
    let freq = p[0] / span;
    let decay = p[1] / span;
    let phase0 = p[2] - 2.0 * PI * freq * t0;
    p[0] = freq;
    p[1] = decay;
    p[2] = phase0.sin().atan2(phase0.cos());
    p[3] *= (decay * t0).exp();
    fit.uncertainties[0] /= span;
    fit.uncertainties[1] /= span;
    if cycles < 2.0 {
        fit.converged = false;
        fit.warnings.push(FitWarning::UnderResolved);
    }
    Ok(fit)
}

/// Cavity temperature when a hot source at `source_k` feeds one of two
/// equally coupled ports and the other sees a cold load:
/// 4 k_B T_s γ = 2γ k_B T_cav ⇒ T_cav = T_s/2.
pub fn thermal_cavity_temperature(source_k: f64) -> Result<f64> {
    if !(source_k > 0.0 && source_k.is_finite()) {
        return Err(Error::InvalidParameter { name: "source_temperature", reason: "must be positive" });
    }
    Ok(source_k / 2.0)
}

/// Bose–Einstein occupation 1/(e^{hf/k_BT} − 1).
pub fn bose_occupation(frequency: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (PLANCK * frequency / (BOLTZMANN * temperature)).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityPoint {
    /// Factor applied to the cavity coupling (γ used in the photon number).
    pub coupling_scale: f64,
    /// Factor applied to α.
    pub anharmonicity_scale: f64,
    /// Resulting g/2π in Hz.
    pub coupling: f64,
}

/// g from the Kerr inversion while γ and α each vary over ±1 decade in
/// steps of 1/5 decade. K_a scales with γ because n ∝ 1/γ.
pub fn kerr_sensitivity_scan(self_kerr: f64, anharmonicity: f64, detuning: f64) -> Vec<SensitivityPoint> {
    let factors: Vec<f64> = (-5..=5).map(|k| 10f64.powf(k as f64 / 5.0)).collect();
    let mut out = Vec::with_capacity(factors.len() * factors.len());
    for &fg in &factors {
        for &fa in &factors {
            let ratio = (self_kerr * fg / (anharmonicity * fa)).abs();
            out.push(SensitivityPoint { coupling_scale: fg, anharmonicity_scale: fa, coupling: detuning.abs() * ratio.powf(0.25) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn trace_validation() {
        assert!(Trace::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Trace::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Trace::new(vec![2.0, 1.0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn lorentzian_round_trip() {
        let (f0, w) = (7.1873e9, 53e3);
        let xs = grid(f0 - 400e3, f0 + 350e3, 201);
        let ys: Vec<f64> = xs.iter().map(|x| 0.8 / (1.0 + (2.0 * (x - f0) / w).powi(2)) + 0.05).collect();
        let fit = fit_lorentzian(&Trace::new(xs, ys).unwrap()).unwrap();
        assert!(fit.converged);
        assert!(((fit.get("center").unwrap() - f0) / f0).abs() < 1e-6 * 1e-3);
        assert!((fit.get("fwhm").unwrap() / w - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_trace_fails() {
        let xs = grid(0.0, 1.0, 20);
        let fit = fit_lorentzian(&Trace::new(xs.clone(), vec![1.0; 20]).unwrap()).unwrap();
        assert!(!fit.converged && fit.has_warning(FitWarning::NoSignal));
        assert!(!fit_exponential(&Trace::new(xs, vec![0.3; 20]).unwrap()).unwrap().converged);
    }

    #[test]
    fn coupling_round_trip_and_limits() {
        let (g, delta, alpha) = (67e6, 5.4e9, -1.3e6);
        let m = crate::device::dressed_slope(g, delta, alpha);
        let pairs: Vec<(f64, f64)> = (0..10).map(|i| {
            let q = 12.6e9 - i as f64 * 2e6;
            (q, 7.18e9 + m * (q - 12.6e9))
        }).collect();
        let fit = fit_coupling_from_dressed(&pairs, delta, alpha).unwrap();
        assert!((fit.get("coupling").unwrap() / g - 1.0).abs() < 1e-6);
        let shifted: Vec<(f64, f64)> = pairs.iter().map(|(q, r)| (q + 1e6, r + 1e6)).collect();
        let fit2 = fit_coupling_from_dressed(&shifted, delta, alpha).unwrap();
        assert!((fit2.get("coupling").unwrap() / fit.get("coupling").unwrap() - 1.0).abs() < 1e-9);
        let flipped: Vec<(f64, f64)> = pairs.iter().map(|(q, r)| (*q, -r)).collect();
        assert!(fit_coupling_from_dressed(&flipped, delta, alpha).unwrap().has_warning(FitWarning::SignError));
        let fit0 = fit_coupling_from_dressed(&pairs, delta, 0.0).unwrap();
        let want = (-fit0.get("slope").unwrap()).sqrt() * delta.abs() / 2.0;
        assert!((fit0.get("coupling").unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_round_trip() {
        let t1 = 6.5e-6;
        let xs = grid(0.0, 40e-6, 30);
        let ys: Vec<f64> = xs.iter().map(|t| 1.0 - 0.97 * (-t / t1).exp()).collect();
        let fit = fit_exponential(&Trace::new(xs, ys).unwrap()).unwrap();
        assert!(fit.converged);
        assert!((fit.get("t1").unwrap() / t1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn damped_sinusoid_round_trip() {
        let xs = grid(0.0, 3e-6, 400);
        let ys: Vec<f64> = xs.iter().map(|t| 0.4 * (-2e5 * t).exp() * (2.0 * PI * 1.7e6 * t + 0.3).cos() + 0.5).collect();
        let fit = fit_damped_sinusoid(&Trace::new(xs, ys).unwrap()).unwrap();
        assert!(fit.converged, "{fit:?}");
        assert!((fit.get("frequency").unwrap() / 1.7e6 - 1.0).abs() < 1e-6);
        assert!((fit.get("decay").unwrap() / 2e5 - 1.0).abs() < 1e-6);
        assert!((fit.get("phase").unwrap() - 0.3).abs() < 1e-6);
    }

    #[test]
    fn under_resolved_oscillation_is_flagged() {
        let xs = grid(0.0, 1.0, 100);
        let ys: Vec<f64> = xs.iter().map(|t| (2.0 * PI * 1.2 * t).cos()).collect();
        let fit = fit_damped_sinusoid(&Trace::new(xs, ys).unwrap()).unwrap();
        assert!(fit.has_warning(FitWarning::UnderResolved) && !fit.converged);
    }

    #[test]
    fn kerr_inversion() {
        let setup = KerrFitSetup { linewidth: angular(200e3), cavity_frequency: 13.45e9, attenuation_db: -75.0, anharmonicity: -1.3e6, detuning: 874e6 };
        let powers = grid(-40.0, -10.0, 12);
        let ys: Vec<f64> = powers.iter().map(|p| 13.45e9 + 0.5 * 13.33e3 * photons_from_source_power(&setup, *p)).collect();
        let fit = fit_self_kerr(&Trace::new(powers.clone(), ys).unwrap(), &setup).unwrap();
        assert!((fit.get("self_kerr").unwrap() / 13.33e3 - 1.0).abs() < 1e-6);
        assert!(fit.has_warning(FitWarning::SignMismatch));
        let g = fit.get("coupling").unwrap();
        assert!((257e6 - 60e6..=257e6 + 60e6).contains(&g), "{g}");
        let flat = fit_self_kerr(&Trace::new(powers, vec![13.45e9; 12]).unwrap(), &setup).unwrap();
        assert_eq!(flat.get("coupling").unwrap(), 0.0);
    }

    #[test]
    fn thermal_balance() {
        assert_eq!(thermal_cavity_temperature(4.0).unwrap(), 2.0);
        let n = bose_occupation(7.1873e9, 2.0);
        assert!((n - 5.3).abs() < 0.1, "{n}");
        assert_eq!(bose_occupation(7e9, 0.0), 0.0);
        assert!(bose_occupation(7e9, 0.01) < 1e-10);
    }

    #[test]
    fn sensitivity_scan_brackets_nominal() {
        let scan = kerr_sensitivity_scan(13.33e3, -1.3e6, 874e6);
        assert_eq!(scan.len(), 121);
        let nominal = scan.iter().find(|p| p.coupling_scale == 1.0 && p.anharmonicity_scale == 1.0).unwrap();
        let (lo, hi) = scan.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.coupling), b.max(p.coupling)));
        assert!(lo < nominal.coupling && nominal.coupling < hi);
    }
}
