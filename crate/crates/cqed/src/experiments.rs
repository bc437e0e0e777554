//! Experiment registry and the code that turns a device plus settings into
//! tables.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use cqed_core::device::critical_input_power;
use cqed_core::duffing::{hysteresis_map, transmission_sweep, two_tone_map, SweepDirection};
use cqed_core::dynamics::{
    calibrate_pi_pulse, effective_photon_number, rabi_experiment, rabi_point_with, t1_experiment, DrivenQubit, RabiMethod,
    RABI_SAMPLES, RABI_WINDOW_PERIODS,
};
use cqed_core::estimation::{
    bose_occupation, fit_coupling_from_dressed, fit_damped_sinusoid, fit_exponential, fit_lorentzian, fit_self_kerr,
    thermal_cavity_temperature, FitResult, KerrFitSetup, Trace,
};
use cqed_core::geometry::tm_modes;
use cqed_core::units::{angular, attenuated_watts, GHZ, KHZ, MHZ};
use rayon::prelude::*;

use crate::config::{Config, Device};
use crate::error::CliError;
use crate::svg::Style;
use crate::table::Table;

pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub required_keys: &'static [&'static str],
}

pub const REGISTRY: &[ExperimentInfo] = &[
    ExperimentInfo {
        name: "derive-params",
        description: "junction, transmon and Kerr parameters derived from the device file",
        required_keys: &[
            "qubit.frequency_ghz",
            "qubit.anharmonicity_mhz",
            "junction.critical_current_ua",
            "junction.area_um2",
            "junction.barrier_nm",
            "junction.relative_permittivity",
            "mode.<label>.coupling_mhz",
        ],
    },
    ExperimentInfo {
        name: "modes",
        description: "analytic TM_mn0 frequencies and field weights against measured references",
        required_keys: &["cavity.lx_mm", "cavity.ly_mm", "cavity.lz_mm"],
    },
    ExperimentInfo {
        name: "sweep-cavity",
        description: "Kerr-cavity transmission sweep with branch continuation (--direction)",
        required_keys: &["mode.<label>.frequency_ghz", "mode.<label>.port1_khz", "mode.<label>.coupling_mhz", "qubit.anharmonicity_mhz"],
    },
    ExperimentInfo {
        name: "hysteresis-map",
        description: "ascending minus descending |S21| over power and frequency",
        required_keys: &["mode.<label>.frequency_ghz", "mode.<label>.port1_khz", "mode.<label>.coupling_mhz", "qubit.anharmonicity_mhz"],
    },
    ExperimentInfo {
        name: "two-tone",
        description: "readout transmission versus qubit drive frequency and power",
        required_keys: &["qubit.relaxation_rate_per_s", "mode.<label>.coupling_mhz", "line.drive_attenuation_db"],
    },
    ExperimentInfo {
        name: "rabi",
        description: "ground population after a rectangular drive pulse, Lindblad simulation",
        required_keys: &["rabi.mode", "rabi.coupling_mhz", "rabi.qubit_kerr_mhz", "rabi.attenuation_db", "qubit.relaxation_rate_per_s"],
    },
    ExperimentInfo {
        name: "rabi-sweep",
        description: "Rabi frequency against drive amplitude, points run in parallel",
        required_keys: &["rabi.mode", "rabi.coupling_mhz", "rabi.qubit_kerr_mhz", "rabi.attenuation_db", "qubit.relaxation_rate_per_s"],
    },
    ExperimentInfo {
        name: "t1",
        description: "calibrated pi pulse followed by free decay",
        required_keys: &["rabi.mode", "rabi.coupling_mhz", "qubit.relaxation_rate_per_s"],
    },
    ExperimentInfo {
        name: "critical-power",
        description: "input power at which the junction switches to the normal state",
        required_keys: &["junction.critical_current_ua", "mode.<label>.coupling_mhz", "mode.<label>.port1_khz"],
    },
    ExperimentInfo {
        name: "thermal",
        description: "cavity temperature and thermal photons from a hot source (--source-k, --freq-ghz)",
        required_keys: &[],
    },
    ExperimentInfo {
        name: "fit",
        description: "fit a CSV trace: lorentzian | coupling | kerr | t1 | rabi",
        required_keys: &[],
    },
];

#[derive(Debug, Clone, Args)]
pub struct Globals {
    /// Device parameter file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// σ of Gaussian noise added to measured columns.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Asc,
    Desc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Lorentzian,
    Coupling,
    Kerr,
    T1,
    Rabi,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// List experiments with descriptions and required config keys.
    List,
    DeriveParams,
    Modes {
        #[arg(long, default_value_t = 4)]
        max_m: u32,
        #[arg(long, default_value_t = 4)]
        max_n: u32,
    },
    SweepCavity {
        #[arg(long)]
        mode: Option<String>,
        /// Power at the cavity input, dBm.
        #[arg(long, allow_hyphen_values = true)]
        power_dbm: f64,
        /// Sweep width; defaults to 12 linewidths.
        #[arg(long)]
        span_khz: Option<f64>,
        /// Sweep centre; defaults to the mode frequency.
        #[arg(long)]
        center_ghz: Option<f64>,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, value_enum, default_value = "both")]
        direction: Direction,
        /// ⟨φ_b²⟩ entering K_eff = K_a(1 − φ_b²/2).
        #[arg(long, default_value_t = 0.0)]
        phi_b_sq: f64,
        /// Override the self-Kerr K_a/2π, Hz.
        #[arg(long, allow_hyphen_values = true)]
        kerr_hz: Option<f64>,
    },
    HysteresisMap {
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, allow_hyphen_values = true, default_value_t = -110.0)]
        power_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -70.0)]
        power_max: f64,
        #[arg(long, default_value_t = 41)]
        power_steps: usize,
        #[arg(long)]
        span_khz: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        phi_b_sq: f64,
        #[arg(long, allow_hyphen_values = true)]
        kerr_hz: Option<f64>,
    },
    TwoTone {
        /// Mode probed by the readout tone.
        #[arg(long)]
        readout_mode: Option<String>,
        /// Drive window half-width around the qubit, MHz.
        #[arg(long, default_value_t = 2.0)]
        span_mhz: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Source power range, dBm (line attenuation from the config).
        #[arg(long, allow_hyphen_values = true, default_value_t = -40.0)]
        power_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        power_max: f64,
        #[arg(long, default_value_t = 41)]
        power_steps: usize,
    },
    Rabi {
        /// Source power, dBm (attenuation from `rabi.attenuation_db`).
        #[arg(long, allow_hyphen_values = true, default_value_t = -95.0)]
        power_dbm: f64,
        /// Record length; defaults to four linear Rabi periods.
        #[arg(long)]
        t_max_us: Option<f64>,
        #[arg(long, default_value_t = RABI_SAMPLES)]
        points: usize,
        #[arg(long, default_value_t = cqed_core::dynamics::DEFAULT_QUBIT_DIM)]
        dim: usize,
    },
    RabiSweep {
        #[arg(long, allow_hyphen_values = true, default_value_t = -101.0)]
        power_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -89.0)]
        power_max: f64,
        #[arg(long, default_value_t = 7)]
        power_steps: usize,
        #[arg(long, default_value_t = cqed_core::dynamics::DEFAULT_QUBIT_DIM)]
        dim: usize,
    },
    T1 {
        /// Source power of the π pulse, dBm.
        #[arg(long, allow_hyphen_values = true, default_value_t = -45.0)]
        power_dbm: f64,
        #[arg(long, default_value_t = 40.0)]
        delay_max_us: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        /// Two levels by default; the near-harmonic ladder does not relax as one exponential.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    CriticalPower {
        #[arg(long)]
        mode: Option<String>,
    },
    Thermal {
        #[arg(long, default_value_t = 4.0)]
        source_k: f64,
        #[arg(long, default_value_t = 7.1873)]
        freq_ghz: f64,
    },
    Fit {
        #[arg(value_enum)]
        kind: FitKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        x_col: Option<String>,
        #[arg(long)]
        y_col: Option<String>,
        /// Mode for the coupling and Kerr fits.
        #[arg(long)]
        mode: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::List => "list",
            Command::DeriveParams => "derive-params",
            Command::Modes { .. } => "modes",
            Command::SweepCavity { .. } => "sweep-cavity",
            Command::HysteresisMap { .. } => "hysteresis-map",
            Command::TwoTone { .. } => "two-tone",
            Command::Rabi { .. } => "rabi",
            Command::RabiSweep { .. } => "rabi-sweep",
            Command::T1 { .. } => "t1",
            Command::CriticalPower { .. } => "critical-power",
            Command::Thermal { .. } => "thermal",
            Command::Fit { .. } => "fit",
        }
    }

    fn needs_config(&self) -> bool {
        match self {
            Command::List | Command::Thermal { .. } => false,
            Command::Fit { kind, .. } => matches!(kind, FitKind::Coupling | FitKind::Kerr),
            _ => true,
        }
    }
}

/// What to draw from a finished table.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotSpec {
    Xy { x: String, ys: Vec<(String, Style)> },
    /// Long-format table rendered as a grid: columns (x, y, z).
    Map { x: String, y: String, z: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// File stem, e.g. `sweep_ascending`.
    pub name: String,
    pub table: Table,
    pub plot: Option<(String, PlotSpec)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub artifacts: Vec<Artifact>,
    /// Key-value lines for the terminal and the manifest.
    pub report: Vec<(String, String)>,
}

impl Output {
    fn add(&mut self, name: &str, table: Table, plot: Option<(&str, PlotSpec)>) {
        self.artifacts.push(Artifact { name: name.into(), table, plot: plot.map(|(t, p)| (t.to_string(), p)) });
    }

    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.report.push((key.into(), value.to_string()));
    }
}

fn xy(x: &str, ys: &[(&str, Style)]) -> PlotSpec {
    PlotSpec::Xy { x: x.into(), ys: ys.iter().map(|(n, s)| (n.to_string(), *s)).collect() }
}

/// Loaded config (or an empty one) and the device built from it.
pub struct Context {
    pub config: Config,
    pub device: Option<Device>,
}

impl Context {
    pub fn load(globals: &Globals, command: &Command) -> Result<Self, CliError> {
        match (&globals.config, command.needs_config()) {
            (Some(path), _) => {
                let config = Config::load(path)?;
                let device = if matches!(command, Command::Thermal { .. } | Command::List) {
                    None
                } else {
                    Some(Device::from_config(&config)?)
                };
                Ok(Self { config, device })
            }
            (None, false) => Ok(Self { config: Config::default(), device: None }),
            (None, true) => Err(CliError::Config(format!("`{}` needs --config", command.name()))),
        }
    }

    fn device(&self) -> Result<&Device, CliError> {
        self.device.as_ref().ok_or_else(|| CliError::Config("a device config is required".into()))
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 || !(hi > lo) {
        return Err(CliError::Config(format!("grid needs ≥ 2 points and max > min (got {n} points on [{lo}, {hi}])")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn pick_mode(device: &Device, label: Option<&str>) -> Result<usize, CliError> {
    match label {
        Some(l) => device.mode_index(l),
        None => device
            .system
            .modes
            .iter()
            .position(|m| m.dipole_coupling.is_some())
            .ok_or_else(|| CliError::Config("no mode has `coupling_mhz`; pass --mode".into())),
    }
}

fn self_kerr(device: &Device, index: usize, override_hz: Option<f64>, phi_b_sq: f64) -> Result<f64, CliError> {
    let k = match override_hz {
        Some(k) => k,
        None => device.system.kerr(index)?.self_kerr_cavity,
    };
    Ok(cqed_core::device::effective_kerr(k, phi_b_sq)?)
}

fn qubit_model(device: &Device, dim: usize) -> DrivenQubit {
    let q = device.system.qubit;
    DrivenQubit {
        coupling: device.rabi.coupling,
        kerr: device.rabi.qubit_kerr,
        relaxation_rate: q.relaxation_rate,
        dephasing_rate: q.dephasing_rate,
        qubit_minus_drive: q.frequency - device.rabi.drive_frequency,
        dim,
    }
}

/// n_eff for a source power through the Rabi drive line.
pub fn rabi_n_eff(device: &Device, source_dbm: f64) -> Result<f64, CliError> {
    drive_n_eff(device, attenuated_watts(source_dbm, device.rabi.attenuation_db))
}

/// n_eff for a power reaching the Rabi drive port.
pub fn drive_n_eff(device: &Device, port_w: f64) -> Result<f64, CliError> {
    let r = &device.rabi;
    let mode = &device.system.modes[device.mode_index(&r.mode)?];
    Ok(effective_photon_number(
        port_w,
        r.port_coupling,
        r.total_linewidth,
        angular(r.drive_frequency - mode.frequency),
        mode.angular_frequency(),
    )?)
}

fn method_id(m: RabiMethod) -> f64 {
    match m {
        RabiMethod::Fit => 0.0,
        RabiMethod::Spectrum => 1.0,
        RabiMethod::None => 2.0,
    }
}

pub fn run(ctx: &Context, command: &Command) -> Result<Output, CliError> {
    let mut out = Output::default();
    match command {
        Command::List => {}
        Command::DeriveParams => derive_params(ctx.device()?, &mut out)?,
        Command::Modes { max_m, max_n } => modes(ctx, *max_m, *max_n, &mut out)?,
        Command::SweepCavity { mode, power_dbm, span_khz, center_ghz, points, direction, phi_b_sq, kerr_hz } => {
            let device = ctx.device()?;
            let index = pick_mode(device, mode.as_deref())?;
            let m = &device.system.modes[index];
            let kerr = self_kerr(device, index, *kerr_hz, *phi_b_sq)?;
            let span = span_khz.map_or(12.0 * m.total_linewidth() / std::f64::consts::TAU, |s| s * KHZ);
            let centre = center_ghz.map_or(m.frequency, |c| c * GHZ);
            let freqs = grid(centre - span / 2.0, centre + span / 2.0, *points)?;
            out.note("mode", &m.label);
            out.note("self_kerr_eff_hz", kerr);
            out.note("port_power_dbm", power_dbm);
            let dirs: &[(SweepDirection, &str)] = match direction {
                Direction::Asc => &[(SweepDirection::Ascending, "sweep_ascending")],
                Direction::Desc => &[(SweepDirection::Descending, "sweep_descending")],
                Direction::Both => &[(SweepDirection::Ascending, "sweep_ascending"), (SweepDirection::Descending, "sweep_descending")],
            };
            for &(dir, name) in dirs {
                let points = transmission_sweep(m, kerr, *power_dbm, &freqs, dir)?;
                let mut t = Table::new(&[
                    ("freq_hz", "Hz"),
                    ("s21_mag", "1"),
                    ("s21_phase", "rad"),
                    ("n_photons", "1"),
                    ("branch_id", "0 unique, 1 lower, 2 upper"),
                ])
                .measured(&["s21_mag", "s21_phase"]);
                for p in &points {
                    t.push(vec![p.frequency, p.s21.norm(), p.s21.arg(), p.photons, p.branch as u8 as f64]);
                }
                out.add(name, t, Some(("|S21| sweep", xy("freq_hz", &[("s21_mag", Style::Line)]))));
            }
        }
        Command::HysteresisMap { mode, power_min, power_max, power_steps, span_khz, points, phi_b_sq, kerr_hz } => {
            let device = ctx.device()?;
            let index = pick_mode(device, mode.as_deref())?;
            let m = &device.system.modes[index];
            let kerr = self_kerr(device, index, *kerr_hz, *phi_b_sq)?;
            let span = span_khz.map_or(12.0 * m.total_linewidth() / std::f64::consts::TAU, |s| s * KHZ);
            let freqs = grid(m.frequency - span / 2.0, m.frequency + span / 2.0, *points)?;
            let powers = grid(*power_min, *power_max, *power_steps)?;
            let map = hysteresis_map(m, kerr, &powers, &freqs)?;
            let mut t = Table::new(&[("power_dbm", "dBm"), ("freq_hz", "Hz"), ("s21_diff", "1")]).measured(&["s21_diff"]);
            for (i, p) in map.powers_dbm.iter().enumerate() {
                for (j, f) in map.frequencies.iter().enumerate() {
                    t.push(vec![*p, *f, map.difference[i][j]]);
                }
            }
            let bistable = map.difference.iter().filter(|row| row.iter().any(|d| d.abs() > 1e-12)).count();
            out.note("mode", &m.label);
            out.note("self_kerr_eff_hz", kerr);
            out.note("powers_with_hysteresis", bistable);
            out.add(
                "hysteresis",
                t,
                Some(("ascending - descending |S21|", PlotSpec::Map { x: "freq_hz".into(), y: "power_dbm".into(), z: "s21_diff".into() })),
            );
        }
        Command::TwoTone { readout_mode, span_mhz, points, power_min, power_max, power_steps } => {
            let device = ctx.device()?;
            let readout = pick_mode(device, readout_mode.as_deref())?;
            let q = device.system.qubit;
            let drive = grid(q.frequency - span_mhz * MHZ, q.frequency + span_mhz * MHZ, *points)?;
            let powers = grid(*power_min, *power_max, *power_steps)?;
            let amplitudes = powers
                .iter()
                .map(|p| {
                    drive_n_eff(device, attenuated_watts(*p, device.drive_attenuation_db))
                        .map(|n| device.rabi.coupling.abs() * n.sqrt())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (readout_freq, _) = device.system.dressed_frequencies(readout, 0.0)?;
            let map = two_tone_map(&device.system, readout, readout_freq, &drive, &amplitudes)?;
            let mut t = Table::new(&[
                ("drive_freq_hz", "Hz"),
                ("drive_power_dbm", "dBm"),
                ("qubit_photons", "1"),
                ("dressed_cavity_hz", "Hz"),
                ("s21_mag", "1"),
                ("s21_phase", "rad"),
            ])
            .measured(&["s21_mag", "s21_phase"]);
            for (row, p) in map.iter().zip(&powers) {
                for pt in row {
                    t.push(vec![pt.drive_frequency, *p, pt.qubit_photons, pt.dressed_cavity, pt.s21.norm(), pt.s21.arg()]);
                }
            }
            out.note("readout_mode", &device.system.modes[readout].label);
            out.note("readout_freq_hz", readout_freq);
            out.add(
                "two_tone",
                t,
                Some(("readout phase", PlotSpec::Map { x: "drive_freq_hz".into(), y: "drive_power_dbm".into(), z: "s21_phase".into() })),
            );
        }
        Command::Rabi { power_dbm, t_max_us, points, dim } => {
            let device = ctx.device()?;
            let qubit = qubit_model(device, *dim);
            let n_eff = rabi_n_eff(device, *power_dbm)?;
            let linear = 2.0 * qubit.coupling.abs() * n_eff.sqrt();
            let t_max = match t_max_us {
                Some(t) => t * 1e-6,
                None if linear > 0.0 => RABI_WINDOW_PERIODS / linear,
                None => return Err(CliError::Config("zero drive: pass --t-max-us".into())),
            };
            let durations = grid(0.0, t_max, *points)?;
            let trace = rabi_experiment(&qubit, n_eff, &durations)?;
            let mut t = Table::new(&[("duration_s", "s"), ("p_ground", "1")]).measured(&["p_ground"]);
            for (d, p) in trace.durations.iter().zip(&trace.ground_population) {
                t.push(vec![*d, *p]);
            }
            out.note("n_eff", n_eff);
            out.note("rabi_hz", trace.frequency);
            out.note("linear_rabi_hz", linear);
            out.note("method", format!("{:?}", trace.method));
            out.add("rabi", t, Some(("Rabi oscillation", xy("duration_s", &[("p_ground", Style::Line)]))));
        }
        Command::RabiSweep { power_min, power_max, power_steps, dim } => {
            let device = ctx.device()?;
            let qubit = qubit_model(device, *dim);
            let powers = grid(*power_min, *power_max, *power_steps)?;
            let n = powers.iter().map(|p| rabi_n_eff(device, *p)).collect::<Result<Vec<_>, _>>()?;
            let results: Vec<_> = n
                .par_iter()
                .map(|n| rabi_point_with(&qubit, n.sqrt(), RABI_WINDOW_PERIODS, RABI_SAMPLES))
                .collect::<Result<_, _>>()?;
            let mut t = Table::new(&[
                ("power_dbm", "dBm"),
                ("sqrt_n_eff", "1"),
                ("rabi_hz", "Hz"),
                ("linear_hz", "Hz"),
                ("method_id", "0 fit, 1 spectrum, 2 none"),
            ])
            .measured(&["rabi_hz"]);
            for (p, r) in powers.iter().zip(&results) {
                t.push(vec![*p, r.sqrt_n_eff, r.frequency, r.linear, method_id(r.method)]);
            }
            out.note("points", results.len());
            out.add(
                "rabi_sweep",
                t,
                Some(("Rabi frequency vs drive", xy("sqrt_n_eff", &[("rabi_hz", Style::Scatter), ("linear_hz", Style::Line)]))),
            );
        }
        Command::T1 { power_dbm, delay_max_us, points, dim } => {
            let device = ctx.device()?;
            let qubit = qubit_model(device, *dim);
            let pulse = calibrate_pi_pulse(&qubit, rabi_n_eff(device, *power_dbm)?)?;
            let delays = grid(0.0, delay_max_us * 1e-6, *points)?;
            let trace = t1_experiment(&qubit, Some(&pulse), &delays)?;
            let mut t = Table::new(&[("delay_s", "s"), ("p_ground", "1")]).measured(&["p_ground"]);
            for (d, p) in trace.delays.iter().zip(&trace.ground_population) {
                t.push(vec![*d, *p]);
            }
            out.note("pi_pulse_s", pulse.duration);
            out.note("rabi_hz", pulse.rabi_frequency);
            out.note("t1_model_s", device.system.qubit.t1());
            out.add("t1", t, Some(("relaxation after a pi pulse", xy("delay_s", &[("p_ground", Style::Scatter)]))));
        }
        Command::CriticalPower { mode } => {
            let device = ctx.device()?;
            let index = pick_mode(device, mode.as_deref())?;
            let m = &device.system.modes[index];
            let ic = device
                .critical_current
                .ok_or_else(|| CliError::Config("missing key `junction.critical_current_ua`".into()))?;
            let g = m.dipole_coupling.ok_or_else(|| CliError::Config(format!("mode {} has no coupling_mhz", m.label)))?;
            let p = critical_input_power(ic, m.frequency, device.system.qubit.frequency, g, m.total_linewidth())?;
            let mut t = Table::new(&[("p_star_w", "W"), ("p_star_dbm", "dBm")]);
            t.push(vec![p.watts(), p.dbm()]);
            out.note("mode", &m.label);
            out.note("p_star_dbm", p.dbm());
            out.add("critical_power", t, None);
        }
        Command::Thermal { source_k, freq_ghz } => {
            let t_cav = thermal_cavity_temperature(*source_k)?;
            let n = bose_occupation(freq_ghz * GHZ, t_cav);
            let mut t = Table::new(&[("source_k", "K"), ("cavity_k", "K"), ("freq_hz", "Hz"), ("n_thermal", "1")]);
            t.push(vec![*source_k, t_cav, freq_ghz * GHZ, n]);
            out.note("cavity_k", t_cav);
            out.note("n_thermal", n);
            out.add("thermal", t, None);
        }
        Command::Fit { kind, input, x_col, y_col, mode } => {
            let data = Table::read(input)?;
            let fit = fit_trace(ctx, *kind, &data, x_col.as_deref(), y_col.as_deref(), mode.as_deref())?;
            let mut cols: Vec<(String, String)> = Vec::new();
            let mut row = Vec::new();
            for (i, name) in fit.names.iter().enumerate() {
                cols.push((name.to_string(), String::new()));
                cols.push((format!("{name}_sigma"), String::new()));
                row.push(fit.values[i]);
                row.push(fit.uncertainties[i]);
                out.note(name, format!("{} ± {}", fit.values[i], fit.uncertainties[i]));
            }
            cols.push(("residual_norm".into(), String::new()));
            cols.push(("converged".into(), "0/1".into()));
            cols.push(("iterations".into(), String::new()));
            row.extend([fit.residual_norm, fit.converged as u8 as f64, fit.iterations as f64]);
            out.note("converged", fit.converged);
            out.note("warnings", format!("{:?}", fit.warnings));
            let names: Vec<(&str, &str)> = cols.iter().map(|(n, u)| (n.as_str(), u.as_str())).collect();
            let mut t = Table::new(&names);
            t.push(row);
            let stem = format!("fit_{}", kind.to_possible_value().map_or("fit".into(), |v| v.get_name().to_string()));
            out.add(&stem, t, None);
        }
    }
    Ok(out)
}

fn derive_params(device: &Device, out: &mut Output) -> Result<(), CliError> {
    let j = device
        .system
        .junction
        .ok_or_else(|| CliError::Config("derive-params needs junction.critical_current_ua, area_um2, barrier_nm, relative_permittivity".into()))?;
    let ec = j.charging_energy();
    let ej = j.josephson_energy();
    let nu_q = j.transmon_frequency()?;
    let mut cols = vec![
        ("capacitance_f", "F", j.capacitance),
        ("ec_hz", "Hz", ec.hz()),
        ("ej_hz", "Hz", ej.hz()),
        ("ej_over_ec", "1", ej.joules() / ec.joules()),
        ("inductance_h", "H", j.inductance()),
        ("qubit_freq_hz", "Hz", nu_q),
        ("anharmonicity_hz", "Hz", -ec.hz()),
        ("phi_zpf", "rad", j.zero_point_phase()),
    ];
    let mut owned: Vec<(String, &str, f64)> = cols.drain(..).map(|(n, u, v)| (n.to_string(), u, v)).collect();
    for (i, m) in device.system.modes.iter().enumerate() {
        if m.dipole_coupling.is_none() {
            continue;
        }
        let k = device.system.kerr(i)?;
        owned.push((format!("{}_detuning_hz", m.label), "Hz", device.system.detuning(i)?));
        owned.push((format!("{}_self_kerr_hz", m.label), "Hz", k.self_kerr_cavity));
        owned.push((format!("{}_cross_kerr_hz", m.label), "Hz", k.cross_kerr));
        owned.push((format!("{}_qubit_kerr_hz", m.label), "Hz", k.self_kerr_qubit));
    }
    let names: Vec<(&str, &str)> = owned.iter().map(|(n, u, _)| (n.as_str(), *u)).collect();
    let mut t = Table::new(&names);
    t.push(owned.iter().map(|c| c.2).collect());
    out.note("C", format!("{:.4} pF", j.capacitance * 1e12));
    out.note("E_C/h", format!("{:.4} MHz", ec.hz() / MHZ));
    out.note("E_J/h", format!("{:.4} THz", ej.hz() / 1e12));
    out.note("E_J/E_C", format!("{:.1}", ej.joules() / ec.joules()));
    out.note("L_J", format!("{:.4e} H", j.inductance()));
    out.note("nu_q", format!("{:.4} GHz", nu_q / GHZ));
    out.note("alpha/2pi", format!("{:.4} MHz", -ec.hz() / MHZ));
    out.note("phi_zpf", format!("{:.4}", j.zero_point_phase()));
    out.add("params", t, None);
    Ok(())
}

fn modes(ctx: &Context, max_m: u32, max_n: u32, out: &mut Output) -> Result<(), CliError> {
    let device = ctx.device()?;
    let geometry = device
        .geometry
        .ok_or_else(|| CliError::Config("modes needs cavity.lx_mm, cavity.ly_mm, cavity.lz_mm".into()))?;
    let mut t = Table::new(&[
        ("m", "1"),
        ("n", "1"),
        ("freq_hz", "Hz"),
        ("field_weight", "1"),
        ("reference_hz", "Hz"),
        ("deviation_pct", "%"),
    ]);
    for s in tm_modes(&geometry, max_m, max_n) {
        let label = s.index.label();
        let reference = match ctx.config.optional(&format!("cavity.reference_ghz.{label}"))? {
            Some(r) => Some(r * GHZ),
            None => device.system.mode_index(&label).map(|i| device.system.modes[i].frequency),
        };
        let dev = reference.map(|r| 100.0 * (s.frequency - r) / r);
        t.push(vec![
            s.index.m as f64,
            s.index.n as f64,
            s.frequency,
            s.field_weight + 0.0,
            reference.unwrap_or(f64::NAN),
            dev.unwrap_or(f64::NAN),
        ]);
        let measured = match (reference, dev) {
            (Some(r), Some(d)) => format!("  measured {:.4} GHz  deviation {:+.2}%", r / GHZ, d),
            _ => String::new(),
        };
        out.note(&label, format!("{:.4} GHz  weight {:+.3}{measured}", s.frequency / GHZ, s.field_weight + 0.0));
    }
    out.add("modes", t, Some(("TM_mn0 modes", xy("freq_hz", &[("field_weight", Style::Scatter)]))));
    Ok(())
}

fn fit_trace(
    ctx: &Context,
    kind: FitKind,
    data: &Table,
    x_col: Option<&str>,
    y_col: Option<&str>,
    mode: Option<&str>,
) -> Result<FitResult, CliError> {
    let (dx, dy) = match kind {
        FitKind::Lorentzian => ("freq_hz", "s21_mag"),
        FitKind::Coupling => ("qubit_hz", "cavity_hz"),
        FitKind::Kerr => ("power_dbm", "freq_hz"),
        FitKind::T1 => ("delay_s", "p_ground"),
        FitKind::Rabi => ("duration_s", "p_ground"),
    };
    let (xc, yc) = (x_col.unwrap_or(dx), y_col.unwrap_or(dy));
    let x = data.require(xc)?;
    let mut y = data.require(yc)?;
    let fit = match kind {
        FitKind::Lorentzian => {
            // |S21| is the square root of a Lorentzian; fit the power.
            if yc == "s21_mag" {
                y.iter_mut().for_each(|v| *v *= *v);
            }
            fit_lorentzian(&Trace::new(x, y)?)?
        }
        FitKind::T1 => fit_exponential(&Trace::new(x, y)?)?,
        FitKind::Rabi => fit_damped_sinusoid(&Trace::new(x, y)?)?,
        FitKind::Coupling => {
            let device = ctx.device()?;
            let i = pick_mode(device, mode)?;
            let pairs: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
            fit_coupling_from_dressed(&pairs, device.system.detuning(i)?, device.system.qubit.anharmonicity)?
        }
        FitKind::Kerr => {
            let device = ctx.device()?;
            let i = pick_mode(device, mode)?;
            let m = &device.system.modes[i];
            let setup = KerrFitSetup {
                linewidth: m.total_linewidth(),
                cavity_frequency: m.frequency,
                attenuation_db: device.drive_attenuation_db,
                anharmonicity: device.system.qubit.anharmonicity,
                detuning: device.system.detuning(i)?,
            };
            fit_self_kerr(&Trace::new(x, y)?, &setup)?
        }
    };
    Ok(fit)
}
