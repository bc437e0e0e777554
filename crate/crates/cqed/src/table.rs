//! Column tables, their CSV form and synthetic measurement noise.
//!
//! ```text
//! # cqed 0.1.0 sweep-cavity
//! # config: sha256 <hex>
//! # col: freq_hz [Hz]
//! # col: s21_mag [1]
//! freq_hz,s21_mag
//! 7187300000,0.25
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
    /// Measured quantity; receives synthetic noise.
    pub measured: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, u)| Column { name: n.to_string(), unit: u.to_string(), measured: false })
                .collect(),
            rows: Vec::new(),
        }
    }

    /// Mark columns that carry measured values.
    pub fn measured(mut self, names: &[&str]) -> Self {
        for c in &mut self.columns {
            c.measured = names.contains(&c.name.as_str());
        }
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Adds N(0, σ²) to every measured column. Column k draws from ChaCha20
    /// stream k of `seed`, so columns are independent of each other and of
    /// the row count of other columns.
    pub fn add_noise(&mut self, seed: u64, sigma: f64) -> Result<(), CliError> {
        if sigma == 0.0 {
            return Ok(());
        }
        let normal = Normal::new(0.0, sigma)
            .map_err(|_| CliError::Config(format!("noise sigma {sigma} must be finite and ≥ 0")))?;
        for (k, col) in self.columns.iter().enumerate() {
            if !col.measured {
                continue;
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            for row in &mut self.rows {
                row[k] += normal.sample(&mut rng);
            }
        }
        Ok(())
    }

    pub fn to_csv(&self, title: &str, config_hash: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# cqed {} {title}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# config: sha256 {config_hash}");
        for c in &self.columns {
            let _ = writeln!(out, "# col: {} [{}]", c.name, c.unit);
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(out, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Parse CSV written by [`Table::to_csv`] (comment lines optional).
    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut units = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# col:") {
                let rest = rest.trim();
                let (name, unit) = match rest.split_once('[') {
                    Some((n, u)) => (n.trim(), u.trim_end_matches(']').trim()),
                    None => (rest, ""),
                };
                units.push((name.to_string(), unit.to_string()));
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| CliError::Input(format!("header: {e}")))?.clone();
        if header.is_empty() {
            return Err(CliError::Input("missing header row".into()));
        }
        let columns = header
            .iter()
            .map(|name| Column {
                name: name.to_string(),
                unit: units.iter().find(|(n, _)| n == name).map(|(_, u)| u.clone()).unwrap_or_default(),
                measured: false,
            })
            .collect();
        let mut table = Table { columns, rows: Vec::new() };
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                CliError::Input(format!("line {line}: {e}"))
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let row = record
                .iter()
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| CliError::Input(format!("line {line}: `{cell}` is not a number")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_csv(&text)
    }

    /// Column by name, or an input error listing what is available.
    pub fn require(&self, name: &str) -> Result<Vec<f64>, CliError> {
        self.column(name).ok_or_else(|| {
            let have: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
            CliError::Input(format!("column `{name}` not found (have: {})", have.join(", ")))
        })
    }
}
