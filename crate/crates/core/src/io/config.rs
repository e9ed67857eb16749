//! `key = value` run configuration with `[section]` headers.
//!
//! Sections: `device`, `waveform`, `ensemble` (or several named
//! `ensemble.NAME` populations), `simulate`, `fit`, `ttf`. `#` starts a
//! comment. Unknown keys are errors unless parsing is lenient.

use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::DegradationTrace;
use crate::fitting::FitOptions;
use crate::models::DeviceParams;
use crate::trapsim::{
    sample_population, simulate_with, EnsembleGenSpec, SimOptions, TrapEnsemble, DEFAULT_REFERENCE_TEMPERATURE,
};
use crate::waveform::{
    build_ac_waveform, build_dc_waveform, AcPattern, AcStressSpec, DcStressSpec, LogGrid, Waveform,
    DEFAULT_READ_PULSE_WIDTH, DEFAULT_READ_TO_RELAX_DELAY,
};

use super::IoError;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    label: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(inner) = body.strip_prefix('[') {
            let inner =
                inner.strip_suffix(']').ok_or_else(|| ConfigError::at(line, "section header is missing `]`"))?.trim();
            let (name, label) = match inner.split_once('.') {
                Some((n, l)) => (n.trim(), Some(l.trim().to_string())),
                None => (inner, None),
            };
            if name.is_empty() || label.as_deref() == Some("") {
                return Err(ConfigError::at(line, "empty section name"));
            }
            if sections.iter().any(|s| s.name == name && s.label == label) {
                return Err(ConfigError::at(line, format!("duplicate section [{inner}]")));
            }
            sections.push(Section { name: name.to_string(), label, line, entries: Vec::new() });
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, found `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::at(line, "missing key before `=`"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| ConfigError::at(line, format!("key `{key}` appears before any [section]")))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::at(line, format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(sections)
}

/// Typed access to one section; tracks which keys were consumed.
struct Fields<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    fn new(section: &'a Section) -> Self {
        Self { section, used: vec![false; section.entries.len()] }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Entry> {
        let i = self.section.entries.iter().position(|e| e.key == key)?;
        self.used[i] = true;
        Some(&self.section.entries[i])
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::at(e.line, format!("`{key}` expects {what}, found `{}`", e.value))),
        }
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.parse(key, "a number")
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn req_f64(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| self.missing(key))
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::at(self.section.line, format!("[{}] is missing required key `{key}`", self.header()))
    }

    fn header(&self) -> String {
        match &self.section.label {
            Some(l) => format!("{}.{l}", self.section.name),
            None => self.section.name.clone(),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.section.entries.iter().find(|e| e.key == key).map_or(self.section.line, |e| e.line)
    }

    /// Report keys nobody asked for.
    fn finish(self, lenient: bool, warnings: &mut Vec<String>) -> Result<()> {
        for (e, used) in self.section.entries.iter().zip(&self.used) {
            if !used {
                let msg = format!("unknown key `{}` in [{}]", e.key, self.header());
                if lenient {
                    warnings.push(format!("line {}: {msg}", e.line));
                } else {
                    return Err(ConfigError::at(e.line, msg));
                }
            }
        }
        Ok(())
    }
}

/// Stress schedule from the `[waveform]` section.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveformConfig {
    Dc(DcStressSpec),
    Ac(AcStressSpec),
}

impl WaveformConfig {
    pub fn build(&self) -> std::result::Result<Waveform, crate::waveform::WaveformError> {
        match self {
            WaveformConfig::Dc(s) => build_dc_waveform(s),
            WaveformConfig::Ac(s) => build_ac_waveform(s),
        }
    }

    pub fn v_stress(&self) -> f64 {
        match self {
            WaveformConfig::Dc(s) => s.v_stress,
            WaveformConfig::Ac(s) => s.v_stress,
        }
    }
}

/// One trap population.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSource {
    Generated(EnsembleGenSpec),
    /// Ensemble CSV, resolved relative to the config file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub name: Option<String>,
    pub source: EnsembleSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub seed: u64,
    pub parallel: bool,
    pub reference_temperature: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { seed: 0, parallel: true, reference_temperature: DEFAULT_REFERENCE_TEMPERATURE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: Option<DeviceParams>,
    pub waveform: Option<WaveformConfig>,
    /// Populations in file order; population `i` draws from RNG stream `i`.
    pub ensemble: Vec<Population>,
    pub simulate: SimulateConfig,
    pub fit: FitOptions,
    pub tolerance_mv: Option<f64>,
    /// SHA-256 of the config text, hex.
    pub hash: String,
    pub warnings: Vec<String>,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunConfig {
    /// Parse config text. Relative ensemble file paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, lenient: bool, base_dir: Option<&Path>) -> Result<Self> {
        let sections = split_sections(text)?;
        let mut warnings = Vec::new();
        let mut cfg = RunConfig {
            device: None,
            waveform: None,
            ensemble: Vec::new(),
            simulate: SimulateConfig::default(),
            fit: FitOptions::default(),
            tolerance_mv: None,
            hash: config_hash(text),
            warnings: Vec::new(),
        };
        for section in &sections {
            let mut f = Fields::new(section);
            if section.label.is_some() && section.name != "ensemble" {
                return Err(ConfigError::at(section.line, format!("section [{}] cannot be named", section.name)));
            }
            match section.name.as_str() {
                "device" => cfg.device = Some(parse_device(&mut f)?),
                "waveform" => cfg.waveform = Some(parse_waveform(&mut f)?),
                "ensemble" => {
                    let source = parse_ensemble(&mut f, base_dir)?;
                    cfg.ensemble.push(Population { name: section.label.clone(), source });
                }
                "simulate" => {
                    cfg.simulate = SimulateConfig {
                        seed: f.parse("seed", "a nonnegative integer")?.unwrap_or(0),
                        parallel: f.parse("parallel", "true or false")?.unwrap_or(true),
                        reference_temperature: f.f64_or("reference_temperature_k", DEFAULT_REFERENCE_TEMPERATURE)?,
                    }
                }
                "fit" => {
                    let d = FitOptions::default();
                    cfg.fit = FitOptions {
                        trim_fraction: f.f64_or("trim_fraction", d.trim_fraction)?,
                        flat_objective_floor: f.f64_or("flat_objective_floor", d.flat_objective_floor)?,
                    }
                }
                "ttf" => cfg.tolerance_mv = f.f64("tolerance_mv")?,
                other => {
                    let msg = format!("unknown section [{other}]");
                    if lenient {
                        warnings.push(format!("line {}: {msg}", section.line));
                        continue;
                    }
                    return Err(ConfigError::at(section.line, msg));
                }
            }
            f.finish(lenient, &mut warnings)?;
        }
        if cfg.ensemble.iter().filter(|p| p.name.is_none()).count() > 0 && cfg.ensemble.len() > 1 {
            return Err(ConfigError::global("mixing [ensemble] with named [ensemble.NAME] sections"));
        }
        cfg.warnings = warnings;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, lenient: bool) -> std::result::Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Self::parse(&text, lenient, path.parent()).map_err(|e| IoError::Config { path: path.to_path_buf(), source: e })
    }

    pub fn require_device(&self) -> Result<DeviceParams> {
        self.device.ok_or_else(|| ConfigError::global("missing [device] section"))
    }

    pub fn require_waveform(&self) -> Result<&WaveformConfig> {
        self.waveform.as_ref().ok_or_else(|| ConfigError::global("missing [waveform] section"))
    }

    pub fn require_ensemble(&self) -> Result<&[Population]> {
        if self.ensemble.is_empty() {
            return Err(ConfigError::global("missing [ensemble] section"));
        }
        Ok(&self.ensemble)
    }

    /// Generate or load every population and concatenate them in order.
    pub fn build_ensemble(&self, seed: u64) -> std::result::Result<TrapEnsemble, IoError> {
        let pops = self.require_ensemble().map_err(|e| IoError::Config { path: PathBuf::new(), source: e })?;
        let mut traps = Vec::new();
        for (i, pop) in pops.iter().enumerate() {
            match &pop.source {
                EnsembleSource::Generated(spec) => {
                    traps.extend(sample_population(spec, seed, i as u64).map_err(IoError::Sim)?)
                }
                EnsembleSource::File(path) => traps.extend(super::read_ensemble_csv(path)?.traps),
            }
        }
        TrapEnsemble::new(traps, self.simulate.reference_temperature, 0.0, seed).map_err(IoError::Sim)
    }
}

impl RunConfig {
    /// Build the device, waveform and ensemble and simulate. `temperature`
    /// overrides the device temperature.
    pub fn simulate(&self, temperature: Option<f64>) -> std::result::Result<DegradationTrace, IoError> {
        let cfg_err = |e: ConfigError| IoError::Config { path: PathBuf::new(), source: e };
        let device = self.require_device().map_err(cfg_err)?;
        let waveform = self.require_waveform().map_err(cfg_err)?.build()?;
        let ensemble = self.build_ensemble(self.simulate.seed)?;
        let options = SimOptions { parallel: self.simulate.parallel };
        let mut trace =
            simulate_with(&ensemble, &waveform, &device, temperature.unwrap_or(device.temperature), options)?;
        trace.meta.source = format!("seed={} config_sha256={}", self.simulate.seed, self.hash);
        Ok(trace)
    }
}

fn parse_device(f: &mut Fields) -> Result<DeviceParams> {
    let eot = f.req_f64("eot_nm")?;
    let v_t0 = f.req_f64("v_t0_v")?;
    let c_ox = f.req_f64("c_ox_f_cm2")?;
    let temperature = f.req_f64("temperature_k")?;
    DeviceParams::new(eot, v_t0, c_ox, temperature).map_err(|e| ConfigError::at(f.section.line, e.to_string()))
}

fn parse_grid(f: &mut Fields) -> Result<LogGrid> {
    let t_min = f.req_f64("grid_t_min_s")?;
    let t_max = f.req_f64("grid_t_max_s")?;
    let ppd = f
        .parse::<u32>("grid_points_per_decade", "a positive integer")?
        .ok_or_else(|| f.missing("grid_points_per_decade"))?;
    LogGrid::new(t_min, t_max, ppd).map_err(|e| ConfigError::at(f.line_of("grid_t_min_s"), e.to_string()))
}

fn parse_waveform(f: &mut Fields) -> Result<WaveformConfig> {
    let kind_line = f.line_of("kind");
    let kind = f.raw("kind").map(|e| e.value.clone()).ok_or_else(|| f.missing("kind"))?;
    let v_stress = f.req_f64("v_stress_v")?;
    let v_relax = f.f64_or("v_relax_v", 0.0)?;
    let at = |e: crate::waveform::WaveformError| ConfigError::at(kind_line, e.to_string());
    match kind.as_str() {
        "dc" => {
            let v_read = f.req_f64("v_read_v")?;
            let stress = f.req_f64("stress_duration_s")?;
            let relax = f.f64_or("relax_duration_s", 0.0)?;
            let grid = parse_grid(f)?;
            let mut spec = DcStressSpec::new(v_stress, v_read, stress, relax, grid);
            spec.v_relax = v_relax;
            spec.read_pulse_width = f.f64_or("read_pulse_width_s", DEFAULT_READ_PULSE_WIDTH)?;
            spec.read_to_relax_delay = f.f64_or("read_to_relax_delay_s", DEFAULT_READ_TO_RELAX_DELAY)?;
            let wf = WaveformConfig::Dc(spec);
            wf.build().map_err(at)?;
            Ok(wf)
        }
        "ac" => {
            let frequency = f.req_f64("frequency_hz")?;
            let duty = f.req_f64("duty")?;
            let target = f.req_f64("target_cumulative_stress_s")?;
            let pattern = match f.raw("pattern") {
                None => AcPattern::RelaxStressMeasure,
                Some(e) => e.value.parse().map_err(|_| {
                    ConfigError::at(
                        e.line,
                        format!("`pattern` expects relax-stress-measure or stress-relax-measure, found `{}`", e.value),
                    )
                })?,
            };
            let grid = parse_grid(f)?;
            let mut spec = AcStressSpec::new(v_stress, frequency, duty, target, grid);
            spec.v_relax = v_relax;
            spec.pattern = pattern;
            let wf = WaveformConfig::Ac(spec);
            wf.build().map_err(at)?;
            Ok(wf)
        }
        other => Err(ConfigError::at(kind_line, format!("`kind` expects dc or ac, found `{other}`"))),
    }
}

fn range(f: &mut Fields, lo: &str, hi: &str, default: (f64, f64)) -> Result<(f64, f64)> {
    Ok((f.f64_or(lo, default.0)?, f.f64_or(hi, default.1)?))
}

fn parse_ensemble(f: &mut Fields, base_dir: Option<&Path>) -> Result<EnsembleSource> {
    if let Some(e) = f.raw("file") {
        let p = PathBuf::from(&e.value);
        let p = match base_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p,
        };
        return Ok(EnsembleSource::File(p));
    }
    let d = EnsembleGenSpec::default();
    let n_traps = f.parse::<usize>("n_traps", "a positive integer")?.unwrap_or(d.n_traps);
    let tau_c_range = range(f, "tau_c_min_s", "tau_c_max_s", d.tau_c_range)?;
    let tau_e_range = range(f, "tau_e_min_s", "tau_e_max_s", d.tau_e_range)?;
    let emission_ratio_range = match (f.f64("emission_ratio_min")?, f.f64("emission_ratio_max")?) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => {
            return Err(ConfigError::at(
                f.line_of("emission_ratio_min").min(f.line_of("emission_ratio_max")),
                "emission_ratio_min and emission_ratio_max must be given together",
            ))
        }
    };
    let spec = EnsembleGenSpec {
        n_traps,
        tau_c_range,
        tau_e_range,
        emission_ratio_range,
        total_eta: f.f64_or("total_eta_v", d.total_eta)?,
        field_threshold_range: range(
            f,
            "field_threshold_min_mvcm",
            "field_threshold_max_mvcm",
            d.field_threshold_range,
        )?,
        ea_capture: f.f64_or("ea_capture_ev", d.ea_capture)?,
        ea_emission: f.f64_or("ea_emission_ev", d.ea_emission)?,
    };
    spec.validate().map_err(|e| ConfigError::at(f.section.line, e.to_string()))?;
    Ok(EnsembleSource::Generated(spec))
}
