//! Relaxation of a simulated DC trace fitted with the universal relaxation
//! curve.

use bti_aging::analysis::peak_metrics;
use bti_aging::fitting::{fit_universal_relax, FitOptions, RelaxSample};
use bti_aging::trapsim::{gen_ensemble, simulate, EnsembleGenSpec};
use bti_aging::waveform::{build_dc_waveform, DcStressSpec, LogGrid};
use bti_aging::DeviceParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let device = DeviceParams::new(2.13, -0.3, 1.5e-6, 298.15)?;
    let ensemble = gen_ensemble(
        &EnsembleGenSpec { tau_c_range: (1e-4, 1e2), emission_ratio_range: Some((1.0, 1e6)), ..Default::default() },
        3,
    )?;
    let t_stress = 100.0;
    let spec = DcStressSpec::new(-1.578, -0.5, t_stress, 1e4, LogGrid::new(1e-2, 1e4, 4)?);
    let trace = simulate(&ensemble, &build_dc_waveform(&spec)?, &device, 298.15)?;

    let m = peak_metrics(&trace)?;
    let samples: Vec<RelaxSample> = m
        .relax
        .iter()
        .filter(|(t, _)| *t > 0.0)
        .map(|&(t, v)| RelaxSample { xi_ratio: t / t_stress, fraction: v / m.stress_end_shift })
        .collect();
    let fit = fit_universal_relax(&samples, FitOptions::default())?;
    println!("b_r = {:.4}, beta = {:.4}, rms {:.3e}", fit.params.b_r, fit.params.beta, fit.residual_rms);
    for s in samples.iter().step_by(3) {
        println!(
            "xi {:>9.2e}  remaining {:.3}  model {:.3}",
            s.xi_ratio,
            s.fraction,
            fit.params.remaining_at_ratio(s.xi_ratio)
        );
    }
    Ok(())
}
