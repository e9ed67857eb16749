//! Command-line surface of the `bti` binary.
//!
//! Exit codes: 0 success, 1 file I/O failure, 2 config/schema/usage error,
//! 3 simulation domain error, 4 fit precondition failure, 5 reference trace
//! never crosses the tolerance.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    ambient_cdf, dit_from_subthreshold, ttf_extension, ttf_project, AnalysisError, CdfMode, TtfReport,
};
use crate::fitting::{fit_dutycycle, fit_dutycycle_by_bias, fit_powerlaw, fit_universal_relax, FitError, FitOptions};
use crate::io::{self, IoError, Provenance, RunConfig};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_FIT: i32 = 4;
pub const EXIT_NO_BASELINE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "bti", version, about = "BTI aging simulation, model fitting and time-to-failure projection")]
pub struct Cli {
    /// Downgrade unknown config keys to warnings.
    #[arg(long, global = true)]
    pub lenient: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a trap ensemble under the configured waveform.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an empirical model to a CSV data set.
    Fit {
        #[arg(value_enum)]
        model: FitModel,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fraction of the largest squared residuals to drop.
        #[arg(long, default_value_t = 0.0)]
        trim_fraction: f64,
    },
    /// Time-to-failure on the cumulative-stress axis.
    Ttf {
        #[arg(long)]
        trace: PathBuf,
        /// Baseline trace for the extension ratio (usually DC).
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        tolerance_mv: f64,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical CDF of per-device shifts.
    Cdf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use signed shifts instead of magnitudes.
        #[arg(long)]
        signed: bool,
        /// Report the median ratio baseline / this data set.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Interface-trap density from the subthreshold swing.
    Dit {
        #[arg(long)]
        ss_mv_dec: f64,
        #[arg(long)]
        temp_k: f64,
        #[arg(long)]
        cox_f_cm2: f64,
        #[arg(long)]
        json: bool,
    },
    /// Generate the configured trap ensemble and write it as CSV.
    GenEnsemble {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Powerlaw,
    Duty,
    Relax,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => EXIT_IO,
            IoError::Config { .. } | IoError::Schema { .. } | IoError::Parse { .. } => EXIT_CONFIG,
            IoError::Sim(_) | IoError::Waveform(_) => EXIT_SIMULATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::new(EXIT_FIT, format!("fit failed: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate { config, out: path } => cmd_simulate(config, path, cli.lenient, out, err),
        Command::Fit { model, input, out: path, trim_fraction } => {
            let options = FitOptions { trim_fraction: *trim_fraction, ..Default::default() };
            cmd_fit(*model, input, path, options, out, err)
        }
        Command::Ttf { trace, reference, tolerance_mv, out: path } => {
            cmd_ttf(trace, reference.as_deref(), *tolerance_mv, path.as_deref(), out)
        }
        Command::Cdf { input, out: path, signed, baseline } => {
            cmd_cdf(input, path, *signed, baseline.as_deref(), out, err)
        }
        Command::Dit { ss_mv_dec, temp_k, cox_f_cm2, json } => cmd_dit(*ss_mv_dec, *temp_k, *cox_f_cm2, *json, out),
        Command::GenEnsemble { config, seed, out: path } => {
            cmd_gen_ensemble(config, *seed, path, cli.lenient, out, err)
        }
    }
}

fn say(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::new(EXIT_IO, format!("stdout: {e}")))
}

fn warn_all(err: &mut dyn Write, warnings: &[String]) {
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
}

fn load_config(path: &Path, lenient: bool, err: &mut dyn Write) -> Result<RunConfig> {
    let cfg = RunConfig::from_file(path, lenient)?;
    warn_all(err, &cfg.warnings);
    Ok(cfg)
}

fn config_error(path: &Path, e: io::ConfigError) -> CliError {
    CliError::new(EXIT_CONFIG, format!("{}: {e}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn cmd_simulate(config: &Path, path: &Path, lenient: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = load_config(config, lenient, err)?;
    cfg.require_device().map_err(|e| config_error(config, e))?;
    cfg.require_waveform().map_err(|e| config_error(config, e))?;
    cfg.require_ensemble().map_err(|e| config_error(config, e))?;
    let seed = cfg.simulate.seed;
    let trace = cfg.simulate(None)?;
    let n_traps = cfg.build_ensemble(seed)?.len();
    let prov = Provenance::new(Some(cfg.hash.clone()), Some(seed));
    io::write_file(path, &io::trace_to_csv(&trace, &prov))?;
    let last = trace.samples.last().map_or(0.0, |s| s.delta_vt);
    say(
        out,
        &format!(
            "seed: {seed}\nconfig_sha256: {}\ntraps: {}\nsamples: {}\nfinal_delta_vt_v: {}\nfinal_abs_delta_vt_mv: {}\n",
            cfg.hash,
            n_traps,
            trace.samples.len(),
            crate::numeric::fmt_f64(last),
            last.abs() * 1e3
        ),
    )
}

#[derive(Serialize)]
struct FitReport<T: Serialize> {
    model: &'static str,
    #[serde(flatten)]
    result: T,
    warnings: Vec<String>,
    provenance: Provenance,
}

fn cmd_fit(
    model: FitModel,
    input: &Path,
    path: &Path,
    options: FitOptions,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let prov = Provenance::new(None, None);
    let json = match model {
        FitModel::Powerlaw => {
            let data = io::read_powerlaw_csv(input)?;
            warn_all(err, &data.warnings);
            let result = fit_powerlaw(&data.rows, options)?;
            to_json(&FitReport { model: "powerlaw", result, warnings: data.warnings, provenance: prov })
        }
        FitModel::Duty => {
            let data = io::read_duty_csv(input)?;
            warn_all(err, &data.warnings);
            if data.rows.iter().any(|(b, _)| b.is_some()) {
                let mut groups: Vec<(f64, Vec<_>)> = Vec::new();
                for (bias, s) in &data.rows {
                    let bias = bias.unwrap_or(f64::NAN);
                    match groups.iter_mut().find(|g| g.0.total_cmp(&bias).is_eq()) {
                        Some(g) => g.1.push(*s),
                        None => groups.push((bias, vec![*s])),
                    }
                }
                let result = fit_dutycycle_by_bias(&groups, options)?;
                to_json(&FitReport { model: "duty-by-bias", result, warnings: data.warnings, provenance: prov })
            } else {
                let rows: Vec<_> = data.rows.iter().map(|(_, s)| *s).collect();
                let result = fit_dutycycle(&rows, options)?;
                to_json(&FitReport { model: "duty", result, warnings: data.warnings, provenance: prov })
            }
        }
        FitModel::Relax => {
            let data = io::read_relax_csv(input)?;
            warn_all(err, &data.warnings);
            let result = fit_universal_relax(&data.rows, options)?;
            to_json(&FitReport { model: "relax", result, warnings: data.warnings, provenance: prov })
        }
    };
    io::write_file(path, &json)?;
    let value: serde_json::Value = serde_json::from_str(&json).expect("valid json");
    let mut summary = value.clone();
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("provenance");
        obj.remove("warnings");
    }
    say(out, &io::key_value_text(&summary))
}

fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::ReferenceNeverCrosses { .. } => CliError::new(EXIT_NO_BASELINE, e.to_string()),
        AnalysisError::InvalidInput { .. } => CliError::new(EXIT_CONFIG, e.to_string()),
        other => CliError::new(EXIT_SIMULATION, other.to_string()),
    }
}

fn cmd_ttf(
    trace: &Path,
    reference: Option<&Path>,
    tolerance_mv: f64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    if !(tolerance_mv > 0.0 && tolerance_mv.is_finite()) {
        return Err(CliError::new(EXIT_CONFIG, format!("--tolerance-mv must be positive, got {tolerance_mv}")));
    }
    let tolerance = tolerance_mv * 1e-3;
    let subject = io::read_trace_csv(trace)?;
    let report: TtfReport = match reference {
        Some(r) => ttf_extension(&subject, &io::read_trace_csv(r)?, tolerance),
        None => ttf_project(&subject, tolerance),
    }
    .map_err(analysis_error)?;
    let json = to_json(&report);
    if let Some(p) = path {
        io::write_file(p, &json)?;
    }
    let mut text = io::key_value_text(&serde_json::from_str(&json).expect("valid json"));
    if report.ttf.is_none() {
        text.push_str("result: not reached\n");
    }
    if let Some(r) = report.extension_ratio {
        let bound = if report.ratio_is_lower_bound { ">" } else { "" };
        text.push_str(&format!("extension: {bound}{r:.3e}x\n"));
    }
    say(out, &text)
}

#[derive(Serialize)]
struct CdfReport {
    n: usize,
    median: f64,
    quantiles: Vec<(f64, f64)>,
    improvement_ratio: Option<f64>,
}

fn cmd_cdf(
    input: &Path,
    path: &Path,
    signed: bool,
    baseline: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let mode = if signed { CdfMode::Signed } else { CdfMode::Magnitude };
    let data = io::read_cdf_input(input)?;
    warn_all(err, &data.warnings);
    let to_err = |e: AnalysisError| CliError::new(EXIT_FIT, e.to_string());
    let summary = ambient_cdf(&data.rows, mode).map_err(to_err)?;
    let improvement_ratio = match baseline {
        Some(b) => {
            let base = io::read_cdf_input(b)?;
            warn_all(err, &base.warnings);
            Some(ambient_cdf(&base.rows, mode).map_err(to_err)?.median / summary.median)
        }
        None => None,
    };
    let digest = std::fs::read(input).map(|b| io::config_hash(&String::from_utf8_lossy(&b))).ok();
    io::write_file(path, &io::cdf_to_csv(&summary, &Provenance::new(digest, None)))?;
    let report =
        CdfReport { n: summary.n, median: summary.median, quantiles: summary.quantiles.clone(), improvement_ratio };
    let mut text = format!("n: {}\nmedian_v: {}\nmedian_mv: {}\n", report.n, report.median, report.median * 1e3);
    for (p, v) in &report.quantiles {
        text.push_str(&format!("quantile_{p}: {v}\n"));
    }
    if let Some(r) = report.improvement_ratio {
        text.push_str(&format!("improvement_ratio: {r}\n"));
    }
    say(out, &text)
}

fn cmd_dit(ss: f64, temperature: f64, c_ox: f64, json: bool, out: &mut dyn Write) -> Result<()> {
    let est = dit_from_subthreshold(ss, temperature, c_ox).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    if json {
        say(out, &to_json(&est))
    } else {
        say(out, &io::key_value_text(&serde_json::to_value(&est).expect("serializable")))
    }
}

fn cmd_gen_ensemble(
    config: &Path,
    seed: u64,
    path: &Path,
    lenient: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let cfg = load_config(config, lenient, err)?;
    cfg.require_ensemble().map_err(|e| config_error(config, e))?;
    let ensemble = cfg.build_ensemble(seed)?;
    let prov = Provenance::new(Some(cfg.hash.clone()), Some(seed));
    io::write_file(path, &io::ensemble_to_csv(&ensemble, &prov))?;
    say(
        out,
        &format!(
            "seed: {seed}\nconfig_sha256: {}\ntraps: {}\nsaturation_v: {}\n",
            cfg.hash,
            ensemble.len(),
            ensemble.saturation()
        ),
    )
}
