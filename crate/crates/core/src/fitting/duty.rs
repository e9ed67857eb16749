use serde::{Deserialize, Serialize};

use super::{count_distinct, grid_argmin, trimmed_sse, FitError, FitOptions, FitResult, Result};
use crate::models::{stress_relax_ratio, DutyCycleLogModel};
use crate::numeric::golden_section_minimize;

/// Shift magnitude measured at one duty cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutySample {
    pub duty: f64,
    /// Volts.
    pub delta_vt_mag: f64,
    pub t_stress_cumulative: f64,
}

const B_MIN: f64 = 1e-4;
const B_MAX: f64 = 1e6;
const POINTS_PER_DECADE: usize = 25;

fn b_grid() -> Vec<f64> {
    let decades = (B_MAX / B_MIN).log10().round() as usize;
    (0..=decades * POINTS_PER_DECADE).map(|k| B_MIN * 10f64.powf(k as f64 / POINTS_PER_DECADE as f64)).collect()
}

struct Prepared {
    ratios: Vec<f64>,
    y: Vec<f64>,
}

fn prepare(samples: &[DutySample]) -> Result<Prepared> {
    let bad: Vec<usize> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            !((0.0..1.0).contains(&s.duty) && s.delta_vt_mag.is_finite() && s.t_stress_cumulative.is_finite())
        })
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(FitError::InvalidRows { rows: bad, reason: "duty must lie in [0, 1) and values be finite" });
    }
    let distinct = count_distinct(samples.iter().map(|s| s.duty));
    if distinct < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: distinct, what: "distinct duty values" });
    }
    let first = samples[0].t_stress_cumulative;
    if let Some(other) = samples.iter().map(|s| s.t_stress_cumulative).find(|&t| t != first) {
        return Err(FitError::MixedStressTime { first, other });
    }
    let mut rows = samples.to_vec();
    rows.sort_by(|a, b| a.duty.total_cmp(&b.duty).then(a.delta_vt_mag.total_cmp(&b.delta_vt_mag)));
    Ok(Prepared {
        ratios: rows.iter().map(|s| stress_relax_ratio(s.duty)).collect(),
        y: rows.iter().map(|s| s.delta_vt_mag.abs()).collect(),
    })
}

impl Prepared {
    fn basis(&self, b: f64) -> Vec<f64> {
        self.ratios.iter().map(|r| (b * r).ln_1p()).collect()
    }

    /// Least-squares `a` for fixed `b`, clamped at zero.
    fn best_a(&self, g: &[f64]) -> f64 {
        let (mut gy, mut gg) = (0.0, 0.0);
        for (gi, yi) in g.iter().zip(&self.y) {
            gy += gi * yi;
            gg += gi * gi;
        }
        if gg > 0.0 {
            (gy / gg).max(0.0)
        } else {
            0.0
        }
    }

    fn evaluate(&self, b: f64, trim: f64) -> (f64, f64) {
        let g = self.basis(b);
        let a = self.best_a(&g);
        let sq = g.iter().zip(&self.y).map(|(gi, yi)| (yi - a * gi).powi(2)).collect();
        (a, trimmed_sse(sq, trim))
    }

    fn rms(&self, model: &DutyCycleLogModel) -> f64 {
        let g = self.basis(model.b);
        let sse: f64 = g.iter().zip(&self.y).map(|(gi, yi)| (yi - model.a * gi).powi(2)).sum();
        (sse / self.y.len() as f64).sqrt()
    }
}

/// Fit `|ΔV_T| = A ln(1 + B·D/(1−D))` to a duty-cycle sweep.
///
/// `B` is scanned on a log grid over `[1e-4, 1e6]` at 25 points per decade,
/// with `A` solved in closed form at each point; the best grid point is then
/// refined by golden-section search on `ln B`. The loss is in volts, not log
/// space, so a `D = 0` anchor point carries weight.
pub fn fit_dutycycle(samples: &[DutySample], options: FitOptions) -> Result<FitResult<DutyCycleLogModel>> {
    options.validate()?;
    let data = prepare(samples)?;
    let n = data.y.len();
    if data.y.iter().all(|&y| y == 0.0) {
        return Ok(FitResult {
            params: DutyCycleLogModel { a: 0.0, b: B_MIN },
            residual_rms: 0.0,
            n_points: n,
            converged: true,
            unidentifiable: true,
            search_trace_summary: "all shifts are zero; b unidentifiable, reported at grid minimum".into(),
        });
    }

    let grid = b_grid();
    let objectives: Vec<f64> = grid.iter().map(|&b| data.evaluate(b, options.trim_fraction).1).collect();
    let best = grid_argmin(&objectives);
    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(grid.len() - 1)].ln();
    let refined = golden_section_minimize(|lb| data.evaluate(lb.exp(), options.trim_fraction).1, lo, hi, 1e-6, 200);

    let (b, converged) = if refined.f < objectives[best] {
        (refined.x.exp(), refined.converged)
    } else {
        (grid[best], refined.converged)
    };
    let (a, _) = data.evaluate(b, options.trim_fraction);
    let params = DutyCycleLogModel { a, b };
    let mut summary = format!(
        "grid {} points over b in [{B_MIN:e}, {B_MAX:e}], best grid b = {:.6e}; golden refinement {} evaluations",
        grid.len(),
        grid[best],
        refined.evaluations
    );
    if best == 0 || best == grid.len() - 1 {
        summary.push_str("; optimum at grid edge");
    }
    Ok(FitResult {
        residual_rms: data.rms(&params),
        params,
        n_points: n,
        converged,
        unidentifiable: false,
        search_trace_summary: summary,
    })
}

/// Fit only `A` with `B` held fixed.
pub fn fit_dutycycle_fixed_b(
    samples: &[DutySample],
    b: f64,
    options: FitOptions,
) -> Result<FitResult<DutyCycleLogModel>> {
    options.validate()?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(FitError::InvalidOption { name: "b", value: b });
    }
    let data = prepare(samples)?;
    let (a, _) = data.evaluate(b, options.trim_fraction);
    let params = DutyCycleLogModel { a, b };
    Ok(FitResult {
        residual_rms: data.rms(&params),
        params,
        n_points: data.y.len(),
        converged: true,
        unidentifiable: false,
        search_trace_summary: format!("b fixed at {b:e}; a by linear least squares"),
    })
}

/// Independent duty-cycle fits per stress bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasGroupFit {
    /// `(bias, fit)` in ascending bias order.
    pub fits: Vec<(f64, FitResult<DutyCycleLogModel>)>,
    pub b_min: f64,
    pub b_max: f64,
    /// `b_max / b_min`.
    pub b_spread: f64,
}

pub fn fit_dutycycle_by_bias(groups: &[(f64, Vec<DutySample>)], options: FitOptions) -> Result<BiasGroupFit> {
    if groups.is_empty() {
        return Err(FitError::TooFewPoints { needed: 1, got: 0, what: "bias groups" });
    }
    let mut fits =
        groups.iter().map(|(bias, s)| fit_dutycycle(s, options).map(|f| (*bias, f))).collect::<Result<Vec<_>>>()?;
    fits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let b_min = fits.iter().map(|f| f.1.params.b).fold(f64::INFINITY, f64::min);
    let b_max = fits.iter().map(|f| f.1.params.b).fold(0.0, f64::max);
    Ok(BiasGroupFit { fits, b_min, b_max, b_spread: b_max / b_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sweep(a: f64, b: f64) -> Vec<DutySample> {
        (1..=9)
            .map(|k| {
                let duty = k as f64 / 10.0;
                let r = duty / (1.0 - duty);
                DutySample { duty, delta_vt_mag: a * (1.0 + b * r).ln(), t_stress_cumulative: 1e3 }
            })
            .collect()
    }

    #[test]
    fn grid_has_251_points() {
        let g = b_grid();
        assert_eq!(g.len(), 251);
        assert_eq!(g[0], 1e-4);
        assert_relative_eq!(g[250], 1e6, max_relative = 1e-12);
    }

    #[test]
    fn recovers_exact_sweep() {
        let fit = fit_dutycycle(&sweep(0.12, 3.0), FitOptions::default()).unwrap();
        assert_relative_eq!(fit.params.a, 0.12, max_relative = 1e-4);
        assert_relative_eq!(fit.params.b, 3.0, max_relative = 1e-4);
        assert!(fit.converged && !fit.unidentifiable);
    }

    #[test]
    fn zero_anchor_does_not_move_exact_optimum() {
        let mut data = sweep(0.12, 3.0);
        let plain = fit_dutycycle(&data, FitOptions::default()).unwrap();
        data.push(DutySample { duty: 0.0, delta_vt_mag: 0.0, t_stress_cumulative: 1e3 });
        let anchored = fit_dutycycle(&data, FitOptions::default()).unwrap();
        assert_relative_eq!(plain.params.b, anchored.params.b, max_relative = 1e-5);
    }

    #[test]
    fn all_zero_is_unidentifiable() {
        let data: Vec<_> = sweep(0.0, 3.0);
        let fit = fit_dutycycle(&data, FitOptions::default()).unwrap();
        assert_eq!(fit.params.a, 0.0);
        assert!(fit.unidentifiable);
    }

    #[test]
    fn small_b_beats_fixed_unit_b() {
        let data = sweep(0.12, 1e-3);
        let free = fit_dutycycle(&data, FitOptions::default()).unwrap();
        let fixed = fit_dutycycle_fixed_b(&data, 1.0, FitOptions::default()).unwrap();
        assert!(free.residual_rms <= fixed.residual_rms);
    }

    #[test]
    fn precondition_errors() {
        let two: Vec<_> = sweep(0.1, 1.0).into_iter().take(2).collect();
        assert!(matches!(fit_dutycycle(&two, FitOptions::default()), Err(FitError::TooFewPoints { .. })));
        let mut mixed = sweep(0.1, 1.0);
        mixed[4].t_stress_cumulative = 10.0;
        assert!(matches!(fit_dutycycle(&mixed, FitOptions::default()), Err(FitError::MixedStressTime { .. })));
        let mut dc = sweep(0.1, 1.0);
        dc[0].duty = 1.0;
        assert!(matches!(fit_dutycycle(&dc, FitOptions::default()), Err(FitError::InvalidRows { .. })));
    }

    #[test]
    fn per_bias_reports_spread() {
        let groups = vec![(-2.0, sweep(0.2, 5.0)), (-1.0, sweep(0.1, 2.0))];
        let r = fit_dutycycle_by_bias(&groups, FitOptions::default()).unwrap();
        assert_eq!(r.fits[0].0, -2.0);
        assert_relative_eq!(r.b_spread, 2.5, max_relative = 1e-3);
    }
}
