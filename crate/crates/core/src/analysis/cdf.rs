use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};

/// Whether the CDF is built over |ΔV_T| or the signed shifts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfMode {
    #[default]
    Magnitude,
    Signed,
}

/// Empirical distribution of per-device shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSummary {
    pub n: usize,
    pub median: f64,
    pub quantiles: Vec<(f64, f64)>,
    /// `(value, rank / n)` in ascending order.
    pub cdf_points: Vec<(f64, f64)>,
}

/// Probabilities reported in [`CdfSummary::quantiles`].
pub const REPORTED_QUANTILES: [f64; 7] = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95];

/// Type-7 sample quantile: linear interpolation between order statistics at
/// `h = (n − 1) p`. `sorted` must be ascending and nonempty.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let w = h - lo as f64;
    if w == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + w * (sorted[hi] - sorted[lo])
    }
}

pub fn ambient_cdf(samples: &[f64], mode: CdfMode) -> Result<CdfSummary> {
    if samples.is_empty() {
        return Err(AnalysisError::NoSamples);
    }
    if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidInput {
            name: "delta_vt",
            value: bad,
            reason: "shift values must be finite",
        });
    }
    let mut values: Vec<f64> = match mode {
        CdfMode::Magnitude => samples.iter().map(|v| v.abs()).collect(),
        CdfMode::Signed => samples.to_vec(),
    };
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let cdf_points = values.iter().enumerate().map(|(i, &v)| (v, (i + 1) as f64 / n as f64)).collect();
    let quantiles = REPORTED_QUANTILES.iter().map(|&p| (p, quantile_type7(&values, p))).collect();
    Ok(CdfSummary { n, median: quantile_type7(&values, 0.5), quantiles, cdf_points })
}
