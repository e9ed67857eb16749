//! AC stress at D = 0.5 from 1 kHz to 10 MHz. Slow traps see the same
//! degradation at every frequency once compared at equal stress time.

use bti_aging::trapsim::{gen_ensemble, simulate, EnsembleGenSpec};
use bti_aging::waveform::{build_ac_waveform, AcStressSpec, LogGrid};
use bti_aging::DeviceParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let device = DeviceParams::new(2.13, -0.3, 1.5e-6, 298.15)?;
    let spec = EnsembleGenSpec { tau_c_range: (0.1, 1e3), tau_e_range: (0.1, 1e3), ..Default::default() };
    let ensemble = gen_ensemble(&spec, 7)?;
    let grid = LogGrid::new(1e-3, 1e3, 1)?;

    let freqs = [1e3, 1e5, 1e7];
    let mut columns = Vec::new();
    for f in freqs {
        let waveform = build_ac_waveform(&AcStressSpec::new(-1.578, f, 0.5, 1e3, grid))?;
        let trace = simulate(&ensemble, &waveform, &device, 298.15)?;
        println!("{f:>8.0e} Hz: {}", waveform.descriptor());
        columns.push(trace.samples);
    }
    println!("{:>10} {:>10} {:>10} {:>10}", "t_stress_s", "1 kHz", "100 kHz", "10 MHz");
    for i in 0..columns[0].len() {
        print!("{:>10.1e}", columns[0][i].t_cum_stress);
        for c in &columns {
            print!(" {:>10.3}", c[i].delta_vt.abs() * 1e3);
        }
        println!();
    }
    Ok(())
}
