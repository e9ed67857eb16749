//! File formats: run configs, trace and ensemble CSVs, fit inputs.
//!
//! Every CSV written here starts with `#` comment lines carrying the tool
//! version, config hash and seed; readers skip them. Reals are written with
//! 17 significant digits so a write/read round trip is bit-exact.

mod config;

pub use config::{config_hash, ConfigError, EnsembleSource, Population, RunConfig, SimulateConfig, WaveformConfig};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{CdfSummary, DegradationTrace, TraceMeta, TraceSample};
use crate::fitting::{DutySample, FieldTimeSample, RelaxSample};
use crate::numeric::fmt_f64;
use crate::trapsim::{Trap, TrapEnsemble, TrapSimError, DEFAULT_REFERENCE_TEMPERATURE};
use crate::waveform::{Phase, WaveformError};

pub const TRACE_HEADER: [&str; 4] = ["t_wall_s", "t_cum_stress_s", "delta_vt_v", "phase"];
pub const ENSEMBLE_HEADER: [&str; 6] =
    ["tau_c_ref_s", "tau_e_ref_s", "eta_v", "ea_capture_ev", "ea_emission_ev", "field_threshold_mvcm"];
pub const POWERLAW_COLUMNS: [&str; 3] = ["xi_mvcm", "t_s", "delta_vt_v"];
pub const DUTY_COLUMNS: [&str; 2] = ["duty", "delta_vt_v"];
pub const RELAX_COLUMNS: [&str; 2] = ["xi_ratio", "fraction"];
pub const CDF_INPUT_COLUMN: &str = "delta_vt_v";
pub const CDF_HEADER: [&str; 2] = ["value_v", "fraction"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Config { path: PathBuf, source: ConfigError },
    #[error("{}: missing columns {missing:?}", path.display())]
    Schema { path: PathBuf, missing: Vec<String> },
    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error(transparent)]
    Sim(#[from] TrapSimError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, IoError>;

/// Provenance echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    /// SHA-256 of the config (or input) file.
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(config_sha256: Option<String>, seed: Option<u64>) -> Self {
        Self { tool_version: crate::TOOL_VERSION.to_string(), config_sha256, seed }
    }

    pub fn comment_header(&self) -> String {
        let opt = |o: Option<String>| o.unwrap_or_else(|| "none".into());
        format!(
            "# {}\n# config_sha256: {}\n# seed: {}\n",
            self.tool_version,
            opt(self.config_sha256.clone()),
            opt(self.seed.map(|s| s.to_string()))
        )
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| IoError::io(path, e))
}

fn csv_text(prov: &Provenance, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = prov.comment_header();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn trace_to_csv(trace: &DegradationTrace, prov: &Provenance) -> String {
    let rows = trace
        .samples
        .iter()
        .map(|s| vec![fmt_f64(s.t_wall), fmt_f64(s.t_cum_stress), fmt_f64(s.delta_vt), s.phase.as_str().to_string()]);
    csv_text(prov, &TRACE_HEADER, rows)
}

pub fn ensemble_to_csv(ensemble: &TrapEnsemble, prov: &Provenance) -> String {
    let rows = ensemble.traps.iter().map(|t| {
        [t.tau_c_ref, t.tau_e_ref, t.eta, t.ea_capture, t.ea_emission, t.field_threshold]
            .iter()
            .map(|&v| fmt_f64(v))
            .collect()
    });
    csv_text(prov, &ENSEMBLE_HEADER, rows)
}

pub fn cdf_to_csv(summary: &CdfSummary, prov: &Provenance) -> String {
    let rows = summary.cdf_points.iter().map(|&(v, p)| vec![fmt_f64(v), fmt_f64(p)]);
    csv_text(prov, &CDF_HEADER, rows)
}

/// Column-indexed table read from a commented CSV.
struct Table {
    path: PathBuf,
    columns: HashMap<String, usize>,
    header: Vec<String>,
    records: Vec<(u64, csv::StringRecord)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(file);
    let parse_err = |e: csv::Error| IoError::Parse {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let header: Vec<String> = rdr.headers().map_err(parse_err)?.iter().map(str::to_string).collect();
    let columns = header.iter().enumerate().map(|(i, h)| (h.clone(), i)).collect();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(parse_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    Ok(Table { path: path.to_path_buf(), columns, header, records })
}

impl Table {
    fn is_blank(&self) -> bool {
        self.records.is_empty() && self.header.iter().all(|h| h.is_empty())
    }

    /// Error out on missing columns; return the names of extra ones.
    fn require(&self, needed: &[&str]) -> Result<Vec<String>> {
        let missing: Vec<String> =
            needed.iter().filter(|c| !self.columns.contains_key(**c)).map(|c| c.to_string()).collect();
        if !missing.is_empty() {
            return Err(IoError::Schema { path: self.path.clone(), missing });
        }
        Ok(self.header.iter().filter(|h| !needed.contains(&h.as_str())).cloned().collect())
    }

    fn field<'r>(&self, line: u64, rec: &'r csv::StringRecord, col: &str) -> Result<&'r str> {
        rec.get(self.columns[col]).ok_or_else(|| IoError::Parse {
            path: self.path.clone(),
            line,
            message: format!("row is missing column `{col}`"),
        })
    }

    fn number(&self, line: u64, rec: &csv::StringRecord, col: &str) -> Result<f64> {
        let s = self.field(line, rec, col)?;
        s.parse().map_err(|_| IoError::Parse {
            path: self.path.clone(),
            line,
            message: format!("`{col}` expects a number, found `{s}`"),
        })
    }
}

/// Rows from a fit input plus warnings about ignored columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInput<T> {
    pub rows: Vec<T>,
    pub warnings: Vec<String>,
}

fn unknown_warnings(extra: Vec<String>) -> Vec<String> {
    extra.into_iter().map(|c| format!("ignoring unknown column `{c}`")).collect()
}

pub fn read_trace_csv(path: &Path) -> Result<DegradationTrace> {
    let table = read_table(path)?;
    table.require(&TRACE_HEADER)?;
    let mut samples = Vec::with_capacity(table.records.len());
    for (line, rec) in &table.records {
        let phase_str = table.field(*line, rec, "phase")?;
        let phase: Phase = phase_str.parse().map_err(|_| IoError::Parse {
            path: path.to_path_buf(),
            line: *line,
            message: format!("unknown phase `{phase_str}`"),
        })?;
        samples.push(TraceSample {
            t_wall: table.number(*line, rec, "t_wall_s")?,
            t_cum_stress: table.number(*line, rec, "t_cum_stress_s")?,
            delta_vt: table.number(*line, rec, "delta_vt_v")?,
            phase,
        });
    }
    let meta = TraceMeta { source: path.display().to_string(), ..Default::default() };
    DegradationTrace::new(samples, meta).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn read_ensemble_csv(path: &Path) -> Result<TrapEnsemble> {
    let table = read_table(path)?;
    table.require(&ENSEMBLE_HEADER)?;
    let mut traps = Vec::with_capacity(table.records.len());
    for (line, rec) in &table.records {
        let n = |c: &str| table.number(*line, rec, c);
        traps.push(Trap {
            tau_c_ref: n("tau_c_ref_s")?,
            tau_e_ref: n("tau_e_ref_s")?,
            eta: n("eta_v")?,
            ea_capture: n("ea_capture_ev")?,
            ea_emission: n("ea_emission_ev")?,
            field_threshold: n("field_threshold_mvcm")?,
        });
    }
    Ok(TrapEnsemble::new(traps, DEFAULT_REFERENCE_TEMPERATURE, 0.0, 0)?)
}

pub fn read_powerlaw_csv(path: &Path) -> Result<FitInput<FieldTimeSample>> {
    let table = read_table(path)?;
    if table.is_blank() {
        return Ok(FitInput { rows: Vec::new(), warnings: Vec::new() });
    }
    let warnings = unknown_warnings(table.require(&POWERLAW_COLUMNS)?);
    let mut rows = Vec::new();
    for (line, rec) in &table.records {
        rows.push(FieldTimeSample {
            xi: table.number(*line, rec, "xi_mvcm")?,
            t: table.number(*line, rec, "t_s")?,
            delta_vt: table.number(*line, rec, "delta_vt_v")?,
        });
    }
    Ok(FitInput { rows, warnings })
}

/// Duty-sweep rows, grouped by the optional `bias_v` column.
///
/// An optional `t_stress_cumulative_s` column is checked for consistency by
/// the fit; without it every row shares one stress time.
pub fn read_duty_csv(path: &Path) -> Result<FitInput<(Option<f64>, DutySample)>> {
    let table = read_table(path)?;
    if table.is_blank() {
        return Ok(FitInput { rows: Vec::new(), warnings: Vec::new() });
    }
    let extra = table.require(&DUTY_COLUMNS)?;
    let optional = ["bias_v", "t_stress_cumulative_s"];
    let warnings = unknown_warnings(extra.into_iter().filter(|c| !optional.contains(&c.as_str())).collect());
    let has = |c: &str| table.columns.contains_key(c);
    let mut rows = Vec::new();
    for (line, rec) in &table.records {
        let bias = if has("bias_v") { Some(table.number(*line, rec, "bias_v")?) } else { None };
        let t = if has("t_stress_cumulative_s") { table.number(*line, rec, "t_stress_cumulative_s")? } else { 1.0 };
        rows.push((
            bias,
            DutySample {
                duty: table.number(*line, rec, "duty")?,
                delta_vt_mag: table.number(*line, rec, "delta_vt_v")?.abs(),
                t_stress_cumulative: t,
            },
        ));
    }
    Ok(FitInput { rows, warnings })
}

pub fn read_relax_csv(path: &Path) -> Result<FitInput<RelaxSample>> {
    let table = read_table(path)?;
    if table.is_blank() {
        return Ok(FitInput { rows: Vec::new(), warnings: Vec::new() });
    }
    let warnings = unknown_warnings(table.require(&RELAX_COLUMNS)?);
    let mut rows = Vec::new();
    for (line, rec) in &table.records {
        rows.push(RelaxSample {
            xi_ratio: table.number(*line, rec, "xi_ratio")?,
            fraction: table.number(*line, rec, "fraction")?,
        });
    }
    Ok(FitInput { rows, warnings })
}

pub fn read_cdf_input(path: &Path) -> Result<FitInput<f64>> {
    let table = read_table(path)?;
    if table.is_blank() {
        return Ok(FitInput { rows: Vec::new(), warnings: Vec::new() });
    }
    let warnings = unknown_warnings(table.require(&[CDF_INPUT_COLUMN])?);
    let rows =
        table.records.iter().map(|(line, rec)| table.number(*line, rec, CDF_INPUT_COLUMN)).collect::<Result<_>>()?;
    Ok(FitInput { rows, warnings })
}

/// Flat `key: value` rendering of a JSON object, one line per leaf.
pub fn key_value_text(value: &serde_json::Value) -> String {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut String) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            serde_json::Value::Null => {
                let _ = writeln!(out, "{prefix}: none");
            }
            serde_json::Value::String(s) => {
                let _ = writeln!(out, "{prefix}: {s}");
            }
            other => {
                let _ = writeln!(out, "{prefix}: {other}");
            }
        }
    }
    let mut out = String::new();
    walk("", value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::TraceMeta;

    fn tmp(name: &str, body: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        (dir, p)
    }

    #[test]
    fn trace_round_trip_is_bit_exact() {
        let samples = vec![
            TraceSample { t_wall: 0.1, t_cum_stress: 0.1, delta_vt: -1.0 / 3.0, phase: Phase::Stress },
            TraceSample { t_wall: 0.30000000000000004, t_cum_stress: 0.1, delta_vt: -2e-17, phase: Phase::Read },
            TraceSample { t_wall: 7.0, t_cum_stress: 0.1, delta_vt: -0.0, phase: Phase::Relax },
        ];
        let trace = DegradationTrace::new(samples, TraceMeta::default()).unwrap();
        let text = trace_to_csv(&trace, &Provenance::new(Some("ab".into()), Some(3)));
        assert!(text.starts_with("# bti-aging"));
        let (_d, p) = tmp("t.csv", &text);
        let back = read_trace_csv(&p).unwrap();
        for (a, b) in trace.samples.iter().zip(&back.samples) {
            assert_eq!(a.t_wall.to_bits(), b.t_wall.to_bits());
            assert_eq!(a.delta_vt.to_bits(), b.delta_vt.to_bits());
            assert_eq!(a.phase, b.phase);
        }
    }

    #[test]
    fn ensemble_round_trip() {
        let e = crate::trapsim::gen_ensemble(&Default::default(), 5).unwrap();
        let (_d, p) = tmp("e.csv", &ensemble_to_csv(&e, &Provenance::new(None, Some(5))));
        assert_eq!(read_ensemble_csv(&p).unwrap().traps, e.traps);
    }

    #[test]
    fn missing_columns_are_listed() {
        let (_d, p) = tmp("f.csv", "xi_mvcm,delta_vt_v\n1,2\n");
        match read_powerlaw_csv(&p) {
            Err(IoError::Schema { missing, .. }) => assert_eq!(missing, vec!["t_s"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_columns_warn() {
        let (_d, p) = tmp("r.csv", "xi_ratio,fraction,note\n1,0.5,x\n");
        let input = read_relax_csv(&p).unwrap();
        assert_eq!(input.rows.len(), 1);
        assert_eq!(input.warnings.len(), 1);
    }

    #[test]
    fn empty_file_has_no_rows() {
        let (_d, p) = tmp("e.csv", "");
        assert!(read_duty_csv(&p).unwrap().rows.is_empty());
    }

    #[test]
    fn key_value_flattens() {
        let v = serde_json::json!({"a": 1.5, "b": {"c": null, "d": "x"}});
        assert_eq!(key_value_text(&v), "a: 1.5\nb.c: none\nb.d: x\n");
    }
}
