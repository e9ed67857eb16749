//! Small numerical helpers shared across modules.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Fixed-order pairwise summation.
///
/// The split points depend only on the slice length, so the result is the
/// same no matter how the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Result of a golden-section minimisation.
#[derive(Debug, Clone, Copy)]
pub struct GoldenResult {
    pub x: f64,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `tol` or after `max_evals`
/// evaluations. Ties keep the left point, so the search leans toward
/// smaller `x`.
pub fn golden_section_minimize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_evals: usize,
) -> GoldenResult {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let width_ok = |a: f64, b: f64| (b - a).abs() <= tol;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;

    while evals < max_evals && !width_ok(a, b) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }

    let converged = width_ok(a, b);
    if f1 <= f2 {
        GoldenResult { x: x1, f: f1, evaluations: evals, converged }
    } else {
        GoldenResult { x: x2, f: f2, evaluations: evals, converged }
    }
}

/// Format a float with 17 significant digits (bit-exact round trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
