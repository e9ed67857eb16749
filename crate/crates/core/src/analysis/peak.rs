use serde::{Deserialize, Serialize};

use super::{fraction_between, AnalysisError, DegradationTrace, Result};
use crate::waveform::Phase;

/// Peak shift and post-stress recovery of a stress/relax trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakMetrics {
    /// Cumulative stress time of the first stress-phase maximum of |ΔV_T|.
    pub t_peak: f64,
    /// Maximum stress-phase |ΔV_T|, V.
    pub peak: f64,
    /// |ΔV_T| at the last stress sample before relaxation, V.
    pub stress_end_shift: f64,
    /// `(elapsed relax time, |ΔV_T|)` for each relax sample. Elapsed time is
    /// measured from the last stress sample.
    pub relax: Vec<(f64, f64)>,
}

impl PeakMetrics {
    /// `1 − |ΔV_T(t)| / |ΔV_T at stress end|`, `t` seconds into relaxation.
    ///
    /// Between samples `|ΔV_T|` is interpolated log-linearly in time (linearly
    /// before the first relax sample).
    pub fn recovered_fraction(&self, t_relax: f64) -> Result<f64> {
        if self.relax.is_empty() {
            return Err(AnalysisError::NoRelaxPhase);
        }
        if self.stress_end_shift == 0.0 {
            return Err(AnalysisError::ZeroStressShift);
        }
        let max = self.relax.last().map_or(0.0, |r| r.0);
        if !(t_relax >= 0.0 && t_relax <= max) {
            return Err(AnalysisError::RelaxTimeOutOfRange { t: t_relax, max });
        }
        let remaining = self.shift_at(t_relax);
        Ok(1.0 - remaining / self.stress_end_shift)
    }

    fn shift_at(&self, t: f64) -> f64 {
        let mut prev: (f64, f64) = (0.0, self.stress_end_shift);
        for &(te, v) in &self.relax {
            if t == te {
                return v;
            }
            if t < te {
                let (t0, v0) = prev;
                let w = if t0 > 0.0 { fraction_between(t0.ln(), te.ln(), t.ln()) } else { fraction_between(t0, te, t) };
                return v0 + w * (v - v0);
            }
            prev = (te, v);
        }
        prev.1
    }
}

pub fn peak_metrics(trace: &DegradationTrace) -> Result<PeakMetrics> {
    let first_relax = trace.samples.iter().position(|s| s.phase == Phase::Relax);
    let stress_part = &trace.samples[..first_relax.unwrap_or(trace.samples.len())];
    let mut peak = None::<(f64, f64)>;
    for s in stress_part.iter().filter(|s| s.phase == Phase::Stress) {
        let v = s.delta_vt.abs();
        if peak.is_none_or(|(_, best)| v > best) {
            peak = Some((s.t_cum_stress, v));
        }
    }
    let (t_peak, peak) = peak.ok_or(AnalysisError::NoStressPhase)?;
    let end = stress_part.iter().rev().find(|s| s.phase == Phase::Stress).ok_or(AnalysisError::NoStressPhase)?;
    let relax = match first_relax {
        Some(i) => trace.samples[i..]
            .iter()
            .filter(|s| s.phase == Phase::Relax)
            .map(|s| (s.t_wall - end.t_wall, s.delta_vt.abs()))
            .collect(),
        None => Vec::new(),
    };
    Ok(PeakMetrics { t_peak, peak, stress_end_shift: end.delta_vt.abs(), relax })
}
