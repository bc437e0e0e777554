use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqed::runner::preset_path;
use cqed::table::Table;

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed")).args(args).output().expect("spawn cqed")
}

fn nbse2() -> String {
    preset_path("nbse2.cfg").display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = dir.display().to_string();
    let mut full = vec!["--out", out.as_str()];
    full.extend_from_slice(args);
    cqed(&full)
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "status {:?}\n{}", o.status, stderr(&o));
    o
}

#[test]
fn list_names_every_experiment() {
    let o = ok(cqed(&["list"]));
    let text = stdout(&o);
    for name in ["sweep-cavity", "hysteresis-map", "rabi-sweep", "t1", "critical-power", "thermal", "fit"] {
        assert!(text.contains(name), "{name} missing from:\n{text}");
    }
    assert!(text.lines().filter(|l| !l.trim().is_empty()).count() >= 8);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = nbse2();
    let args = ["--config", &cfg, "--seed", "7", "--noise-sigma", "0.01", "sweep-cavity", "--power-dbm", "-90", "--points", "101"];
    ok(run_in(a.path(), &args));
    ok(run_in(b.path(), &args));
    for name in ["sweep_ascending.csv", "sweep_descending.csv", "manifest.txt"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    let other = ["--config", &cfg, "--seed", "8", "--noise-sigma", "0.01", "sweep-cavity", "--power-dbm", "-90", "--points", "101"];
    ok(run_in(c.path(), &other));
    assert_ne!(fs::read(a.path().join("sweep_ascending.csv")).unwrap(), fs::read(c.path().join("sweep_ascending.csv")).unwrap());
}

#[test]
fn csv_header_and_manifest_record_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = nbse2();
    ok(run_in(dir.path(), &["--config", &cfg, "--plot", "modes"]));
    let csv = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# cqed "));
    let hash_line = lines.next().unwrap();
    assert!(hash_line.starts_with("# config: sha256 "));
    assert_eq!(hash_line.len(), "# config: sha256 ".len() + 64);
    assert!(csv.contains("# col: freq_hz [Hz]"));
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains(env!("CARGO_PKG_VERSION")));
    assert!(manifest.contains("[config]") && manifest.contains("cavity.lx_mm = 26"));
    assert!(manifest.contains(&hash_line["# config: sha256 ".len()..]));
    let svg = fs::read_to_string(dir.path().join("modes.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn derive_params_reports_junction_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = ok(run_in(dir.path(), &["--config", &nbse2(), "derive-params"]));
    let text = stdout(&o);
    assert!(text.contains("15.58"), "{text}");
    assert!(text.contains("12.37"), "{text}");
    let t = Table::read(&dir.path().join("params.csv")).unwrap();
    let c = t.require("capacitance_f").unwrap()[0];
    assert!((c / 15e-12 - 1.0).abs() < 0.1);
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg").display().to_string();
    let o = run_in(dir.path(), &["--config", &missing, "derive-params"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn command_without_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["modes"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

#[test]
fn bad_config_line_is_reported_by_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "qubit.frequency_ghz = 5.7\n# comment\nqubit.relaxation_rate_per_s = fast\n").unwrap();
    let o = run_in(dir.path(), &["--config", path.to_str().unwrap(), "derive-params"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_fails() {
    let o = cqed(&["frobnicate"]);
    assert!(!o.status.success());
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["--config", &nbse2(), "rabi", "--dim", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn negative_noise_sigma_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["--noise-sigma", "-1", "thermal"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thermal_runs_without_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(run_in(dir.path(), &["thermal"]));
    let t = Table::read(&dir.path().join("thermal.csv")).unwrap();
    assert_eq!(t.require("cavity_k").unwrap()[0], 2.0);
}

fn fit_value(dir: &Path, stem: &str, name: &str) -> f64 {
    Table::read(&dir.join(format!("fit_{stem}.csv"))).unwrap().require(name).unwrap()[0]
}

#[test]
fn sweep_output_fits_back_to_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = nbse2();
    ok(run_in(dir.path(), &["--config", &cfg, "sweep-cavity", "--power-dbm", "-140", "--direction", "asc", "--kerr-hz", "0"]));
    let input: PathBuf = dir.path().join("sweep_ascending.csv");
    ok(run_in(dir.path(), &["fit", "lorentzian", "--input", input.to_str().unwrap()]));
    let centre = fit_value(dir.path(), "lorentzian", "center");
    let fwhm = fit_value(dir.path(), "lorentzian", "fwhm");
    assert!((centre / 7.1873e9 - 1.0).abs() < 1e-9, "{centre}");
    assert!((fwhm / 53e3 - 1.0).abs() < 1e-6, "{fwhm}");
}

#[test]
fn t1_output_fits_back_to_relaxation_time() {
    let dir = tempfile::tempdir().unwrap();
    ok(run_in(dir.path(), &["--config", &nbse2(), "t1"]));
    let input = dir.path().join("t1.csv");
    ok(run_in(dir.path(), &["fit", "t1", "--input", input.to_str().unwrap()]));
    let t1 = fit_value(dir.path(), "t1", "t1");
    assert!((t1 * 0.153e6 - 1.0).abs() < 1e-3, "{t1}");
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.csv");
    fs::write(&path, "# cqed\ndelay_s,p_ground\n0,0.1\n1e-6,oops\n").unwrap();
    let o = run_in(dir.path(), &["fit", "t1", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn missing_fit_column_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    fs::write(&path, "a,b\n1,2\n2,3\n").unwrap();
    let o = run_in(dir.path(), &["fit", "t1", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delay_s"));
}
