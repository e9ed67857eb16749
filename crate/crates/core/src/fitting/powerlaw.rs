use serde::{Deserialize, Serialize};

use super::{count_distinct, FitError, FitOptions, FitResult, Result};
use crate::models::PowerLawModel;

/// One point of a field/time degradation data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldTimeSample {
    /// MV/cm.
    pub xi: f64,
    pub t: f64,
    pub delta_vt: f64,
}

struct Ols {
    model: PowerLawModel,
}

/// `ln|ΔV| = ln c0 + m ln|ξ| + α ln t` by centred normal equations.
fn solve(rows: &[FieldTimeSample]) -> Result<Ols> {
    let n = rows.len() as f64;
    let logs: Vec<(f64, f64, f64)> = rows.iter().map(|s| (s.xi.abs().ln(), s.t.ln(), s.delta_vt.abs().ln())).collect();
    let mean = |f: fn(&(f64, f64, f64)) -> f64| logs.iter().map(f).sum::<f64>() / n;
    let (mx, mt, my) = (mean(|r| r.0), mean(|r| r.1), mean(|r| r.2));
    let (mut sxx, mut stt, mut sxt, mut sxy, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, t, y) in &logs {
        let (dx, dt, dy) = (x - mx, t - mt, y - my);
        sxx += dx * dx;
        stt += dt * dt;
        sxt += dx * dt;
        sxy += dx * dy;
        sty += dt * dy;
    }
    let det = sxx * stt - sxt * sxt;
    if !(det > 1e-12 * sxx * stt) {
        return Err(FitError::RankDeficient { axis: "log|xi| and log t are collinear".into() });
    }
    let m = (sxy * stt - sty * sxt) / det;
    let alpha = (sty * sxx - sxy * sxt) / det;
    let c0 = (my - m * mx - alpha * mt).exp();
    Ok(Ols { model: PowerLawModel { c0, m, alpha } })
}

fn magnitude_residuals(model: &PowerLawModel, rows: &[FieldTimeSample]) -> Vec<f64> {
    rows.iter().map(|s| s.delta_vt.abs() - model.c0 * s.xi.abs().powf(model.m) * s.t.powf(model.alpha)).collect()
}

/// Fit `|ΔV_T| = c0 |ξ|^m t^α` by ordinary least squares in log space.
///
/// Rows are sorted before accumulation, so the result does not depend on
/// input order. With trimming enabled, the worst `trim_fraction` of rows by
/// log residual are dropped and the fit is repeated once.
pub fn fit_powerlaw(samples: &[FieldTimeSample], options: FitOptions) -> Result<FitResult<PowerLawModel>> {
    options.validate()?;
    let bad: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| !(s.t > 0.0 && s.t.is_finite() && s.xi.is_finite()))
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(FitError::InvalidRows { rows: bad, reason: "t must be positive and xi finite" });
    }
    let nonpositive: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| !(s.delta_vt.abs() > 0.0 && s.delta_vt.is_finite()) || s.xi == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !nonpositive.is_empty() {
        return Err(FitError::NonpositiveShift { rows: nonpositive });
    }
    let distinct_xi = count_distinct(samples.iter().map(|s| s.xi.abs()));
    if distinct_xi < 3 {
        return Err(FitError::RankDeficient { axis: format!("xi has {distinct_xi} distinct |values|, need 3") });
    }
    let distinct_t = count_distinct(samples.iter().map(|s| s.t));
    if distinct_t < 3 {
        return Err(FitError::RankDeficient { axis: format!("t has {distinct_t} distinct values, need 3") });
    }

    let mut rows = samples.to_vec();
    rows.sort_by(|a, b| {
        a.xi.abs().total_cmp(&b.xi.abs()).then(a.t.total_cmp(&b.t)).then(a.delta_vt.abs().total_cmp(&b.delta_vt.abs()))
    });
    let mut fit = solve(&rows)?;
    let mut summary = format!("ols on {} rows", rows.len());

    let drop = (options.trim_fraction * rows.len() as f64).floor() as usize;
    if drop > 0 {
        let model = fit.model;
        let mut scored: Vec<(f64, FieldTimeSample)> = rows
            .iter()
            .map(|s| {
                let pred = model.c0.ln() + model.m * s.xi.abs().ln() + model.alpha * s.t.ln();
                ((s.delta_vt.abs().ln() - pred).abs(), *s)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(scored.len() - drop);
        let mut kept: Vec<FieldTimeSample> = scored.into_iter().map(|(_, s)| s).collect();
        kept.sort_by(|a, b| a.xi.abs().total_cmp(&b.xi.abs()).then(a.t.total_cmp(&b.t)));
        fit = solve(&kept)?;
        rows = kept;
        summary.push_str(&format!("; trimmed {drop} rows and refit"));
    }

    let res = magnitude_residuals(&fit.model, &rows);
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    Ok(FitResult {
        params: fit.model,
        residual_rms: rms,
        n_points: rows.len(),
        converged: true,
        unidentifiable: false,
        search_trace_summary: summary,
    })
}
