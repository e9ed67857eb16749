//! Deterministic estimators for the empirical NBTI models.
//!
//! The power law is linear in log space and solved by ordinary least
//! squares. The duty-cycle and universal-relaxation models each have one
//! nonlinear parameter: it is scanned on a fixed grid (the other parameter is
//! closed-form at every grid point) and the best grid point is refined by
//! golden-section search. Grid argmins use the total order (objective, then
//! parameter value), so ties go to the smaller parameter.

mod duty;
mod powerlaw;
mod relax;

pub use duty::{fit_dutycycle, fit_dutycycle_by_bias, fit_dutycycle_fixed_b, BiasGroupFit, DutySample};
pub use powerlaw::{fit_powerlaw, FieldTimeSample};
pub use relax::{fit_universal_relax, RelaxSample};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} {what}, got {got}")]
    TooFewPoints { needed: usize, got: usize, what: &'static str },
    #[error("rank-deficient design: {axis}")]
    RankDeficient { axis: String },
    #[error("|delta_vt| must be positive for a power-law fit; offending rows: {rows:?}")]
    NonpositiveShift { rows: Vec<usize> },
    #[error("remaining fraction must lie in (0, 1]; offending rows: {rows:?}")]
    FractionOutOfRange { rows: Vec<usize> },
    #[error("invalid value in rows {rows:?}: {reason}")]
    InvalidRows { rows: Vec<usize>, reason: &'static str },
    #[error("duty samples mix cumulative stress times {first} s and {other} s")]
    MixedStressTime { first: f64, other: f64 },
    #[error("invalid fit option `{name}` = {value}")]
    InvalidOption { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, FitError>;

/// Estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Fraction of the largest squared residuals dropped from the loss.
    /// Zero disables trimming.
    pub trim_fraction: f64,
    /// Objective spread (RMS units) below which a grid scan is reported flat.
    pub flat_objective_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { trim_fraction: 0.0, flat_objective_floor: 1e-3 }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.trim_fraction) {
            return Err(FitError::InvalidOption { name: "trim_fraction", value: self.trim_fraction });
        }
        if !(self.flat_objective_floor >= 0.0) {
            return Err(FitError::InvalidOption { name: "flat_objective_floor", value: self.flat_objective_floor });
        }
        Ok(())
    }
}

/// Fitted parameters with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<M> {
    pub params: M,
    /// RMS residual: volts for shift fits, dimensionless for relax fits.
    pub residual_rms: f64,
    pub n_points: usize,
    pub converged: bool,
    /// The data does not pin down the nonlinear parameter.
    pub unidentifiable: bool,
    pub search_trace_summary: String,
}

/// Sum of squared residuals, optionally dropping the largest ones.
fn trimmed_sse(mut squared: Vec<f64>, trim_fraction: f64) -> f64 {
    let drop = (trim_fraction * squared.len() as f64).floor() as usize;
    if drop > 0 {
        squared.sort_by(f64::total_cmp);
        squared.truncate(squared.len() - drop);
    }
    crate::numeric::pairwise_sum(&squared)
}

fn count_distinct(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Index of the smallest objective; earlier (smaller parameter) wins ties.
fn grid_argmin(objectives: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in objectives.iter().enumerate() {
        if f.total_cmp(&objectives[best]).is_lt() {
            best = i;
        }
    }
    best
}
