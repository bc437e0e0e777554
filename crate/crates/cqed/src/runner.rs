//! Writes an experiment's tables, plots and run manifest to disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::experiments::{run, Command, Context, Globals, Output, PlotSpec, REGISTRY};
use crate::svg::{Heatmap, Plot};
use crate::table::Table;

/// Registry listing, one experiment per line plus its required keys.
pub fn list_experiments() -> String {
    let mut s = String::new();
    for e in REGISTRY {
        let _ = writeln!(s, "{:<16} {}", e.name, e.description);
        if !e.required_keys.is_empty() {
            let _ = writeln!(s, "{:<16}   keys: {}", "", e.required_keys.join(", "));
        }
    }
    s
}

/// Files written by [`execute`] and the text printed to stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub report: String,
}

pub fn execute(globals: &Globals, command: &Command) -> Result<RunSummary, CliError> {
    if let Command::List = command {
        return Ok(RunSummary { files: Vec::new(), report: list_experiments() });
    }
    if !(globals.noise_sigma >= 0.0 && globals.noise_sigma.is_finite()) {
        return Err(CliError::Config(format!("--noise-sigma {} must be finite and ≥ 0", globals.noise_sigma)));
    }
    let ctx = Context::load(globals, command)?;
    let mut output = run(&ctx, command)?;
    for a in &mut output.artifacts {
        a.table.add_noise(globals.seed, globals.noise_sigma)?;
    }
    write_outputs(globals, command, &ctx, &output)
}

fn write_outputs(globals: &Globals, command: &Command, ctx: &Context, output: &Output) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&globals.out)?;
    let hash = ctx.config.hash();
    let mut files = Vec::new();
    for a in &output.artifacts {
        let path = globals.out.join(format!("{}.csv", a.name));
        fs::write(&path, a.table.to_csv(command.name(), &hash))?;
        files.push(path);
        if let (true, Some((title, spec))) = (globals.plot, &a.plot) {
            let path = globals.out.join(format!("{}.svg", a.name));
            fs::write(&path, render(title, spec, &a.table)?)?;
            files.push(path);
        }
    }

    let mut report = String::new();
    for (k, v) in &output.report {
        let _ = writeln!(report, "{k} = {v}");
    }

    let manifest = globals.out.join("manifest.txt");
    fs::write(&manifest, manifest_text(globals, command, ctx, output, &files))?;
    files.push(manifest);
    Ok(RunSummary { files, report })
}

fn manifest_text(globals: &Globals, command: &Command, ctx: &Context, output: &Output, files: &[PathBuf]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool = cqed {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "experiment = {}", command.name());
    let _ = writeln!(s, "settings = {command:?}");
    let _ = writeln!(s, "seed = {}", globals.seed);
    let _ = writeln!(s, "noise_sigma = {}", globals.noise_sigma);
    let _ = writeln!(s, "config = {}", globals.config.as_deref().map_or("-".into(), |p| p.display().to_string()));
    let _ = writeln!(s, "config_sha256 = {}", ctx.config.hash());
    s.push_str("\n[config]\n");
    s.push_str(&ctx.config.canonical());
    s.push_str("\n[results]\n");
    for (k, v) in &output.report {
        let _ = writeln!(s, "{k} = {v}");
    }
    s.push_str("\n[outputs]\n");
    for f in files {
        let _ = writeln!(s, "{}", f.file_name().map_or_else(|| f.display().to_string(), |n| n.to_string_lossy().into_owned()));
    }
    s
}

fn render(title: &str, spec: &PlotSpec, table: &Table) -> Result<String, CliError> {
    match spec {
        PlotSpec::Xy { x, ys } => {
            let xs = table.require(x)?;
            let mut plot = Plot::new(title, x, "");
            for (name, style) in ys {
                let pts = xs.iter().copied().zip(table.require(name)?).collect();
                plot.series.push(crate::svg::Series { name: name.clone(), points: pts, style: *style });
            }
            if let [(only, _)] = ys.as_slice() {
                plot.y_label = only.clone();
            }
            Ok(plot.render())
        }
        PlotSpec::Map { x, y, z } => {
            let (xv, yv, zv) = (table.require(x)?, table.require(y)?, table.require(z)?);
            let mut xs: Vec<f64> = Vec::new();
            let mut ys: Vec<f64> = Vec::new();
            for (&a, &b) in xv.iter().zip(&yv) {
                if !xs.contains(&a) {
                    xs.push(a);
                }
                if !ys.contains(&b) {
                    ys.push(b);
                }
            }
            let mut values = vec![vec![f64::NAN; xs.len()]; ys.len()];
            for ((a, b), c) in xv.iter().zip(&yv).zip(&zv) {
                let (i, j) = (ys.iter().position(|v| v == b), xs.iter().position(|v| v == a));
                if let (Some(i), Some(j)) = (i, j) {
                    values[i][j] = *c;
                }
            }
            Ok(Plot::new(title, x, y).with_heatmap(Heatmap { xs, ys, values }).render())
        }
    }
}

/// Canonical path of a shipped preset, relative to this crate.
pub fn preset_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}
