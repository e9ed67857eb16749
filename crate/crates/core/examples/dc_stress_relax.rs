//! DC stress followed by relaxation on a generated trap ensemble.

use bti_aging::analysis::peak_metrics;
use bti_aging::trapsim::{gen_ensemble, simulate, EnsembleGenSpec};
use bti_aging::waveform::{build_dc_waveform, DcStressSpec, LogGrid, Phase};
use bti_aging::DeviceParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let device = DeviceParams::new(2.13, -0.3, 1.5e-6, 298.15)?;
    let ensemble = gen_ensemble(&EnsembleGenSpec::default(), 2024)?;
    let spec = DcStressSpec::new(-1.578, -0.5, 1e3, 1e3, LogGrid::new(1e-3, 1e3, 2)?);
    let waveform = build_dc_waveform(&spec)?;
    println!("field {:.3} MV/cm, {} traps", device.field(spec.v_stress)?, ensemble.len());

    let trace = simulate(&ensemble, &waveform, &device, 298.15)?;
    println!("{:>8} {:>12} {:>12} {:>10}", "phase", "t_wall_s", "t_stress_s", "dVt_mV");
    for s in &trace.samples {
        println!("{:>8} {:>12.4e} {:>12.4e} {:>10.3}", s.phase, s.t_wall, s.t_cum_stress, s.delta_vt * 1e3);
    }

    let m = peak_metrics(&trace)?;
    println!("peak {:.2} mV at {:.3e} s of stress", m.peak * 1e3, m.t_peak);
    for t in [1e-2, 1.0, 1e2, 1e3] {
        println!("recovered after {t:>7} s: {:.1}%", 100.0 * m.recovered_fraction(t)?);
    }
    let relax = trace.samples.iter().filter(|s| s.phase == Phase::Relax).count();
    println!("{relax} relax samples");
    Ok(())
}
