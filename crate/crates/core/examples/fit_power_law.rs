//! Fit the field/time power law to noisy synthetic shifts and project TTF.

use bti_aging::fitting::{fit_powerlaw, FieldTimeSample, FitOptions};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut samples = Vec::new();
    for xi in [-2.0, -3.0, -4.0, -5.0] {
        for k in 0..10 {
            let t = 10f64.powf(k as f64 * 0.4);
            let noise = 1.0 + 0.02 * (rng.random::<f64>() - 0.5);
            samples.push(FieldTimeSample { xi, t, delta_vt: -0.03 * f64::abs(xi) * t.powf(0.18) * noise });
        }
    }
    let fit = fit_powerlaw(&samples, FitOptions::default())?;
    let p = fit.params;
    println!("c0 = {:.4} V, m = {:.4}, alpha = {:.4}", p.c0, p.m, p.alpha);
    println!("rms residual {:.2e} V over {} points", fit.residual_rms, fit.n_points);
    println!("{}", fit.search_trace_summary);
    for xi in [-2.0, -4.0] {
        println!("|dVt| = 100 mV at {xi} MV/cm after {:.3e} s", p.time_to_reach(xi, 0.1));
    }
    Ok(())
}
