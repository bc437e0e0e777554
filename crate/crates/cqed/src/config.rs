//! Flat `key = value` device files with unit-suffixed keys.
//!
//! ```text
//! # comment
//! qubit.frequency_ghz = 12.611   # trailing comment
//! mode.TM110.frequency_ghz = 7.1873
//! ```
//!
//! Linewidths are given as γ/2π in kHz, anharmonicity and couplings as
//! ordinary frequencies, decay rates in s⁻¹.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use cqed_core::device::{CavityMode, JunctionParameters, QubitParameters, SystemModel};
use cqed_core::geometry::CavityGeometry;
use cqed_core::units::{angular, GHZ, KHZ, MHZ};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
    /// Source line of each parsed key, for value errors.
    lines: BTreeMap<String, usize>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`", i + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Config(format!("line {}: invalid key `{key}`", i + 1)));
            }
            if value.is_empty() {
                return Err(CliError::Config(format!("line {}: missing value for `{key}`", i + 1)));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            lines.insert(key.to_string(), i + 1);
        }
        Ok(Self { entries, lines })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.insert(key.to_string(), value.to_string());
        self.lines.remove(key);
    }

    pub fn number(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.get(key).ok_or_else(|| CliError::Config(format!("missing key `{key}`")))?;
        self.parse_number(key, raw)
    }

    pub fn number_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            Some(raw) => self.parse_number(key, raw),
            None => Ok(default),
        }
    }

    pub fn optional(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|raw| self.parse_number(key, raw)).transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Mode labels in order of first appearance of `mode.<label>.` keys,
    /// sorted by label.
    pub fn mode_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self
            .entries
            .keys()
            .filter_map(|k| k.strip_prefix("mode."))
            .filter_map(|k| k.split_once('.').map(|(l, _)| l.to_string()))
            .collect();
        labels.dedup();
        labels
    }

    /// Sorted `key = value` lines; the hashed form of the config.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of [`Config::canonical`], hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn parse_number(&self, key: &str, raw: &str) -> Result<f64, CliError> {
        let at = self.lines.get(key).map_or(String::new(), |l| format!("line {l}: "));
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("{at}`{key}`: `{raw}` is not a number")))
    }
}

/// Device model plus the line and simulation settings read from a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub system: SystemModel,
    pub geometry: Option<CavityGeometry>,
    /// I_c, A; the full junction needs its geometry as well.
    pub critical_current: Option<f64>,
    /// dB, negative.
    pub readout_attenuation_db: f64,
    pub drive_attenuation_db: f64,
    pub rabi: RabiSettings,
}

/// Parameters of the qubit-drive simulation (`rabi.*` keys); each falls
/// back to the device value when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiSettings {
    pub mode: String,
    /// g/2π, Hz.
    pub coupling: f64,
    /// K_b/2π, Hz.
    pub qubit_kerr: f64,
    /// γ₁, s⁻¹.
    pub port_coupling: f64,
    /// γ_tot, s⁻¹.
    pub total_linewidth: f64,
    pub attenuation_db: f64,
    /// ν_d, Hz.
    pub drive_frequency: f64,
}

fn numerical(e: cqed_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

impl Device {
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        let qubit = QubitParameters::new(
            cfg.number("qubit.frequency_ghz")? * GHZ,
            cfg.number_or("qubit.anharmonicity_mhz", 0.0)? * MHZ,
            cfg.number_or("qubit.relaxation_rate_per_s", 0.0)?,
            cfg.number_or("qubit.dephasing_rate_per_s", 0.0)?,
        )
        .map_err(numerical)?;

        let critical_current = cfg.optional("junction.critical_current_ua")?.map(|ic| ic * 1e-6);
        let junction = match (critical_current, cfg.get("junction.area_um2")) {
            (Some(ic), Some(_)) => Some(
                JunctionParameters::from_geometry(
                    ic,
                    cfg.number("junction.area_um2")? * 1e-12,
                    cfg.number("junction.barrier_nm")? * 1e-9,
                    cfg.number("junction.relative_permittivity")?,
                )
                .map_err(numerical)?,
            ),
            _ => None,
        };

        let labels = cfg.mode_labels();
        if labels.is_empty() {
            return Err(CliError::Config("no `mode.<label>.*` entries".into()));
        }
        let mut modes = Vec::with_capacity(labels.len());
        for label in &labels {
            let key = |field: &str| format!("mode.{label}.{field}");
            let mut mode = CavityMode::new(
                label,
                cfg.number(&key("frequency_ghz"))? * GHZ,
                angular(cfg.number_or(&key("port1_khz"), 0.0)? * KHZ),
                angular(cfg.number_or(&key("port2_khz"), 0.0)? * KHZ),
                angular(cfg.number_or(&key("internal_khz"), 0.0)? * KHZ),
            )
            .map_err(numerical)?;
            if let Some(g) = cfg.optional(&key("coupling_mhz"))? {
                mode = mode.with_coupling(g * MHZ);
            }
            if let Some(k) = cfg.optional(&key("self_kerr_khz"))? {
                mode = mode.with_self_kerr(k * KHZ);
            }
            modes.push(mode);
        }
        let system = SystemModel::new(qubit, modes, junction).map_err(numerical)?;

        let geometry = match cfg.optional("cavity.lx_mm")? {
            Some(lx) => {
                let (lx, ly, lz) = (lx * 1e-3, cfg.number("cavity.ly_mm")? * 1e-3, cfg.number("cavity.lz_mm")? * 1e-3);
                let g = match (cfg.optional("cavity.qubit_x_mm")?, cfg.optional("cavity.qubit_y_mm")?) {
                    (Some(x), Some(y)) => CavityGeometry::new(lx, ly, lz, x * 1e-3, y * 1e-3),
                    _ => CavityGeometry::centered(lx, ly, lz),
                };
                Some(g.map_err(numerical)?)
            }
            None => None,
        };

        let readout_attenuation_db = cfg.number_or("line.readout_attenuation_db", 0.0)?;
        let drive_attenuation_db = cfg.number_or("line.drive_attenuation_db", 0.0)?;
        for (name, v) in [("line.readout_attenuation_db", readout_attenuation_db), ("line.drive_attenuation_db", drive_attenuation_db)] {
            if v > 0.0 {
                return Err(CliError::Config(format!("`{name}` must be ≤ 0 dB")));
            }
        }

        let rabi_mode = cfg.get("rabi.mode").map(str::to_string).unwrap_or_else(|| labels[0].clone());
        let index = system
            .mode_index(&rabi_mode)
            .ok_or_else(|| CliError::Config(format!("`rabi.mode`: unknown mode `{rabi_mode}`")))?;
        let mode = &system.modes[index];
        let rabi = RabiSettings {
            coupling: match cfg.optional("rabi.coupling_mhz")? {
                Some(g) => g * MHZ,
                None => mode.dipole_coupling.unwrap_or(0.0),
            },
            qubit_kerr: cfg.number_or("rabi.qubit_kerr_mhz", system.qubit.anharmonicity / MHZ)? * MHZ,
            port_coupling: match cfg.optional("rabi.port1_khz")? {
                Some(v) => angular(v * KHZ),
                None => mode.port1_coupling,
            },
            total_linewidth: match cfg.optional("rabi.total_linewidth_khz")? {
                Some(v) => angular(v * KHZ),
                None => mode.total_linewidth(),
            },
            attenuation_db: cfg.number_or("rabi.attenuation_db", drive_attenuation_db)?,
            drive_frequency: cfg.number_or("rabi.drive_frequency_ghz", system.qubit.frequency / GHZ)? * GHZ,
            mode: mode.label.clone(),
        };

        Ok(Self { system, geometry, critical_current, readout_attenuation_db, drive_attenuation_db, rabi })
    }

    pub fn mode_index(&self, label: &str) -> Result<usize, CliError> {
        self.system
            .mode_index(label)
            .ok_or_else(|| CliError::Config(format!("unknown mode `{label}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# device
qubit.frequency_ghz = 12.611
qubit.anharmonicity_mhz = -1.3   # from C
mode.TM110.frequency_ghz = 7.1873
mode.TM110.port1_khz = 26.5
mode.TM110.port2_khz = 26.5
mode.TM110.coupling_mhz = 67
";

    #[test]
    fn parses_and_builds_device() {
        let cfg = Config::parse(SAMPLE).unwrap();
        assert_eq!(cfg.get("qubit.anharmonicity_mhz"), Some("-1.3"));
        let dev = Device::from_config(&cfg).unwrap();
        assert_eq!(dev.system.modes.len(), 1);
        assert!((dev.system.modes[0].total_linewidth() - angular(53e3)).abs() < 1e-6);
        assert_eq!(dev.rabi.mode, "TM110");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Config::parse("a = 1\nbroken line\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(Config::parse("a = 1\na = 2").unwrap_err().to_string().contains("duplicate"));
        let cfg = Config::parse("qubit.frequency_ghz = twelve").unwrap();
        assert!(cfg.number("qubit.frequency_ghz").is_err());
    }

    #[test]
    fn hash_ignores_order_and_comments() {
        let a = Config::parse("x = 1\ny = 2").unwrap();
        let b = Config::parse("# c\ny = 2\nx = 1   # z").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), Config::parse("x = 1\ny = 3").unwrap().hash());
    }
}
