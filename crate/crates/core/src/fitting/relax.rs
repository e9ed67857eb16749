use serde::{Deserialize, Serialize};

use super::{grid_argmin, trimmed_sse, FitError, FitOptions, FitResult, Result};
use crate::models::UniversalRelaxModel;
use crate::numeric::golden_section_minimize;

/// Remaining fraction at one relax/stress time ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxSample {
    /// `t_relax / t_stress`.
    pub xi_ratio: f64,
    pub fraction: f64,
}

const BETA_MIN: f64 = 0.05;
const BETA_STEPS: usize = 95;
const B_R_FLOOR: f64 = 1e-9;

fn beta_grid() -> Vec<f64> {
    (0..=BETA_STEPS).map(|k| (5 + k) as f64 / 100.0).collect()
}

struct Prepared {
    rows: Vec<RelaxSample>,
    /// `(ln ξ, ln(1/r − 1))` for rows with `ξ > 0` and `r < 1`.
    usable: Vec<(f64, f64)>,
}

impl Prepared {
    fn b_r(&self, beta: f64) -> f64 {
        let n = self.usable.len() as f64;
        let mean: f64 = self.usable.iter().map(|(lx, ly)| ly - beta * lx).sum::<f64>() / n;
        mean.exp().max(B_R_FLOOR)
    }

    fn sse(&self, model: &UniversalRelaxModel, trim: f64) -> f64 {
        let sq = self.rows.iter().map(|s| (s.fraction - model.remaining_at_ratio(s.xi_ratio)).powi(2)).collect();
        trimmed_sse(sq, trim)
    }

    fn evaluate(&self, beta: f64, trim: f64) -> (UniversalRelaxModel, f64) {
        let model = UniversalRelaxModel { b_r: self.b_r(beta), beta };
        let sse = self.sse(&model, trim);
        (model, sse)
    }

    fn rms(&self, sse: f64) -> f64 {
        (sse / self.rows.len() as f64).sqrt()
    }
}

/// Fit `r = 1 / (1 + b_r ξ^β)` to remaining-fraction data.
///
/// `β` is scanned over `[0.05, 1]` in steps of 0.01. At each `β`, `ln b_r`
/// is the least-squares intercept of `ln(1/r − 1) = ln b_r + β ln ξ`; the
/// grid objective is the squared error in fraction space. The best grid `β`
/// is refined by golden-section search.
pub fn fit_universal_relax(samples: &[RelaxSample], options: FitOptions) -> Result<FitResult<UniversalRelaxModel>> {
    options.validate()?;
    if samples.len() < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: samples.len(), what: "relaxation points" });
    }
    let bad: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| !(s.xi_ratio >= 0.0 && s.xi_ratio.is_finite()))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(FitError::InvalidRows { rows: bad, reason: "xi_ratio must be nonnegative and finite" });
    }
    let out: Vec<usize> =
        samples.iter().enumerate().filter(|(_, s)| !(s.fraction > 0.0 && s.fraction <= 1.0)).map(|(i, _)| i).collect();
    if !out.is_empty() {
        return Err(FitError::FractionOutOfRange { rows: out });
    }

    let mut rows = samples.to_vec();
    rows.sort_by(|a, b| a.xi_ratio.total_cmp(&b.xi_ratio).then(a.fraction.total_cmp(&b.fraction)));
    let usable = rows
        .iter()
        .filter(|s| s.xi_ratio > 0.0 && s.fraction < 1.0)
        .map(|s| (s.xi_ratio.ln(), (1.0 / s.fraction - 1.0).ln()))
        .collect::<Vec<_>>();
    let data = Prepared { rows, usable };
    let n = data.rows.len();

    if data.usable.is_empty() {
        let params = UniversalRelaxModel { b_r: B_R_FLOOR, beta: BETA_MIN };
        let sse = data.sse(&params, options.trim_fraction);
        return Ok(FitResult {
            residual_rms: data.rms(sse),
            params,
            n_points: n,
            converged: true,
            unidentifiable: true,
            search_trace_summary: "no relaxation observed; b_r at floor, beta at grid minimum".into(),
        });
    }

    let grid = beta_grid();
    let objectives: Vec<f64> = grid.iter().map(|&b| data.evaluate(b, options.trim_fraction).1).collect();
    let best = grid_argmin(&objectives);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let refined = golden_section_minimize(|b| data.evaluate(b, options.trim_fraction).1, lo, hi, 1e-6, 200);
    let beta = if refined.f < objectives[best] { refined.x } else { grid[best] };
    let (params, _) = data.evaluate(beta, options.trim_fraction);

    let rms_grid: Vec<f64> = objectives.iter().map(|&f| data.rms(f)).collect();
    let spread = rms_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - rms_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut summary = format!(
        "grid {} points over beta in [0.05, 1], best grid beta = {:.2}; golden refinement {} evaluations",
        grid.len(),
        grid[best],
        refined.evaluations
    );
    if spread < options.flat_objective_floor {
        summary.push_str(&format!("; flat objective (rms spread {spread:.3e} over the beta grid)"));
    }
    Ok(FitResult {
        residual_rms: data.rms(data.sse(&params, 0.0)),
        params,
        n_points: n,
        converged: refined.converged,
        unidentifiable: false,
        search_trace_summary: summary,
    })
}
