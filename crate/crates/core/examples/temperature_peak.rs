//! Heating speeds up the approach to saturation and, with a deep trap
//! population, slows recovery.

use std::path::Path;

use bti_aging::analysis::{peak_metrics, ttf_project};
use bti_aging::io::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let cfg = RunConfig::from_file(&dir.join("dc_default.cfg"), false)?;
    let ensemble = cfg.build_ensemble(cfg.simulate.seed)?;
    let xi = cfg.require_device()?.field(cfg.require_waveform()?.v_stress())?;
    let saturation = ensemble.accessible_saturation(xi);
    for temp in [298.15, 348.0, 398.0] {
        let trace = cfg.simulate(Some(temp))?;
        let t90 = ttf_project(&trace, 0.9 * saturation)?.ttf;
        println!("{temp:>6.1} K: 90% of {:.0} mV after {:.3e} s", saturation * 1e3, t90.unwrap_or(f64::NAN));
    }

    let deep = RunConfig::from_file(&dir.join("temperature_deep_traps.cfg"), false)?;
    for temp in [298.15, 398.0] {
        let m = peak_metrics(&deep.simulate(Some(temp))?)?;
        print!("{temp:>6.1} K: peak {:.1} mV, recovered", m.peak * 1e3);
        for t in [1.0, 1e2, 1e3] {
            print!("  {:.0}% at {t} s", 100.0 * m.recovered_fraction(t)?);
        }
        println!();
    }
    Ok(())
}
