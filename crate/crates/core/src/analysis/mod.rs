//! Reliability quantities derived from degradation traces and device data.

mod cdf;
mod dit;
mod peak;
mod ttf;

pub use cdf::{ambient_cdf, quantile_type7, CdfMode, CdfSummary};
pub use dit::{dit_from_subthreshold, ideal_subthreshold_swing, DitEstimate};
pub use peak::{peak_metrics, PeakMetrics};
pub use ttf::{time_to_fraction_of_peak, ttf_extension, ttf_project, TtfReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::DeviceParams;
use crate::waveform::Phase;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("invalid input `{name}` = {value}: {reason}")]
    InvalidInput { name: &'static str, value: f64, reason: &'static str },
    #[error("trace is empty")]
    EmptyTrace,
    #[error("trace sample {index}: {reason}")]
    MalformedTrace { index: usize, reason: &'static str },
    #[error("reference trace never reaches the {tolerance} V tolerance; no baseline for an extension ratio")]
    ReferenceNeverCrosses { tolerance: f64 },
    #[error("trace has no stress phase")]
    NoStressPhase,
    #[error("trace has no relax phase")]
    NoRelaxPhase,
    #[error("|ΔV_T| at the end of stress is zero; recovery fraction undefined")]
    ZeroStressShift,
    #[error("relax time {t} s is outside the sampled range [0, {max}] s")]
    RelaxTimeOutOfRange { t: f64, max: f64 },
    #[error("no samples given")]
    NoSamples,
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// One sampled point of a degradation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t_wall: f64,
    pub t_cum_stress: f64,
    /// Signed shift, V (negative for NBTI).
    pub delta_vt: f64,
    pub phase: Phase,
}

/// Where a trace came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub device: Option<DeviceParams>,
    pub temperature: Option<f64>,
    pub waveform: String,
    /// Ensemble seed or source file name.
    pub source: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DegradationTrace {
    pub samples: Vec<TraceSample>,
    pub meta: TraceMeta,
}

impl DegradationTrace {
    pub fn new(samples: Vec<TraceSample>, meta: TraceMeta) -> Result<Self> {
        let trace = Self { samples, meta };
        trace.validate()?;
        Ok(trace)
    }

    /// Check clock ordering: wall time strictly increasing, stress time
    /// nondecreasing.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].t_wall > w[0].t_wall) {
                return Err(AnalysisError::MalformedTrace {
                    index: i + 1,
                    reason: "t_wall must be strictly increasing",
                });
            }
            if w[1].t_cum_stress < w[0].t_cum_stress {
                return Err(AnalysisError::MalformedTrace {
                    index: i + 1,
                    reason: "t_cum_stress must be nondecreasing",
                });
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.t_wall.is_finite() && s.t_cum_stress.is_finite() && s.delta_vt.is_finite()) {
                return Err(AnalysisError::MalformedTrace { index: i, reason: "non-finite value" });
            }
            if s.t_wall < 0.0 || s.t_cum_stress < 0.0 {
                return Err(AnalysisError::MalformedTrace { index: i, reason: "negative time" });
            }
        }
        Ok(())
    }

    pub fn stress_samples(&self) -> impl Iterator<Item = &TraceSample> {
        self.samples.iter().filter(|s| s.phase == Phase::Stress)
    }

    pub fn max_abs_shift(&self) -> f64 {
        self.samples.iter().map(|s| s.delta_vt.abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&TraceSample> {
        self.samples.last()
    }

    /// Copy with every cumulative-stress time multiplied by `factor`.
    pub fn with_stress_scaled(&self, factor: f64) -> Self {
        let samples =
            self.samples.iter().map(|s| TraceSample { t_cum_stress: s.t_cum_stress * factor, ..*s }).collect();
        Self { samples, meta: self.meta.clone() }
    }
}

/// Interpolation weight of `target` between `lo` and `hi`.
fn fraction_between(lo: f64, hi: f64, target: f64) -> f64 {
    if hi == lo {
        1.0
    } else {
        ((target - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}

/// `exp(ln a + w (ln b − ln a))` for positive `a`, `b`.
fn log_lerp(a: f64, b: f64, w: f64) -> f64 {
    if w == 0.0 {
        a
    } else if w == 1.0 {
        b
    } else {
        (a.ln() + w * (b.ln() - a.ln())).exp()
    }
}
