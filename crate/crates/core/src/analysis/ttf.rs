use serde::{Deserialize, Serialize};

use super::{fraction_between, log_lerp, AnalysisError, DegradationTrace, Result};

/// Time-to-failure on the cumulative-stress axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtfReport {
    /// |ΔV_T| tolerance, V.
    pub tolerance: f64,
    /// Cumulative stress time at the crossing; `None` when not reached.
    pub ttf: Option<f64>,
    /// Wall-clock time at the crossing, same interpolation weight.
    pub ttf_wall: Option<f64>,
    pub crossing_method: String,
    pub reference_ttf: Option<f64>,
    pub extension_ratio: Option<f64>,
    /// The subject never crossed, so `extension_ratio` is its last sampled
    /// stress time over the reference TTF.
    pub ratio_is_lower_bound: bool,
}

pub const METHOD_INTERPOLATED: &str = "log-linear interpolation";
pub const METHOD_FIRST_SAMPLE: &str = "first sample at or above tolerance";
pub const METHOD_NOT_REACHED: &str = "not reached";

/// First crossing of `|ΔV_T| ≥ tolerance` among stress-phase samples.
///
/// The crossing time is interpolated linearly in `|ΔV_T|` and
/// logarithmically in time between the bracketing samples. Samples with zero
/// cumulative stress are skipped.
pub fn ttf_project(trace: &DegradationTrace, tolerance: f64) -> Result<TtfReport> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(AnalysisError::InvalidInput { name: "tolerance", value: tolerance, reason: "must be positive" });
    }
    if trace.samples.is_empty() {
        return Err(AnalysisError::EmptyTrace);
    }
    let mut report = TtfReport {
        tolerance,
        ttf: None,
        ttf_wall: None,
        crossing_method: METHOD_NOT_REACHED.to_string(),
        reference_ttf: None,
        extension_ratio: None,
        ratio_is_lower_bound: false,
    };

    let mut prev = None;
    for s in trace.stress_samples().filter(|s| s.t_cum_stress > 0.0) {
        let v = s.delta_vt.abs();
        if v >= tolerance {
            match prev {
                Some((t0, w0, v0)) => {
                    let w = fraction_between(v0, v, tolerance);
                    report.ttf = Some(log_lerp(t0, s.t_cum_stress, w));
                    report.ttf_wall = Some(if w0 > 0.0 { log_lerp(w0, s.t_wall, w) } else { s.t_wall });
                    report.crossing_method = METHOD_INTERPOLATED.to_string();
                }
                None => {
                    report.ttf = Some(s.t_cum_stress);
                    report.ttf_wall = Some(s.t_wall);
                    report.crossing_method = METHOD_FIRST_SAMPLE.to_string();
                }
            }
            return Ok(report);
        }
        prev = Some((s.t_cum_stress, s.t_wall, v));
    }
    Ok(report)
}

/// TTF of `subject` relative to `reference`.
///
/// Errors when the reference never crosses. When the subject never crosses,
/// the ratio is a lower bound from its last sampled stress time.
pub fn ttf_extension(subject: &DegradationTrace, reference: &DegradationTrace, tolerance: f64) -> Result<TtfReport> {
    let reference_report = ttf_project(reference, tolerance)?;
    let reference_ttf = reference_report.ttf.ok_or(AnalysisError::ReferenceNeverCrosses { tolerance })?;
    let mut report = ttf_project(subject, tolerance)?;
    report.reference_ttf = Some(reference_ttf);
    match report.ttf {
        Some(t) => report.extension_ratio = Some(t / reference_ttf),
        None => {
            let last = subject.stress_samples().map(|s| s.t_cum_stress).fold(0.0, f64::max);
            if last > 0.0 {
                report.extension_ratio = Some(last / reference_ttf);
                report.ratio_is_lower_bound = true;
            }
        }
    }
    Ok(report)
}

/// Stress time at which `|ΔV_T|` first reaches `fraction` of its stress-phase
/// maximum.
pub fn time_to_fraction_of_peak(trace: &DegradationTrace, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AnalysisError::InvalidInput { name: "fraction", value: fraction, reason: "must lie in (0, 1]" });
    }
    let peak = trace.stress_samples().map(|s| s.delta_vt.abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(AnalysisError::NoStressPhase);
    }
    ttf_project(trace, fraction * peak)?.ttf.ok_or(AnalysisError::NoStressPhase)
}
