//! Time-to-failure extension of pulsed operation over DC, using the shipped
//! calibration scenarios.

use std::path::Path;

use bti_aging::analysis::{ttf_extension, ttf_project};
use bti_aging::io::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let run = |name: &str| -> Result<_, Box<dyn std::error::Error>> {
        Ok(RunConfig::from_file(&dir.join(name), false)?.simulate(None)?)
    };
    let dc = run("calibration_dc.cfg")?;
    let tolerance = 0.1;
    let base = ttf_project(&dc, tolerance)?;
    println!("DC reaches {:.0} mV after {:.4} s of stress", tolerance * 1e3, base.ttf.unwrap_or(f64::NAN));

    for (duty, name) in [(0.5, "calibration_ac_d50.cfg"), (0.2, "calibration_ac_d20.cfg")] {
        let ac = run(name)?;
        let r = ttf_extension(&ac, &dc, tolerance)?;
        println!(
            "D = {duty}: TTF {:.3e} s stress, {:.3e} s wall, extension {}{:.3e}x",
            r.ttf.unwrap_or(f64::NAN),
            r.ttf_wall.unwrap_or(f64::NAN),
            if r.ratio_is_lower_bound { ">" } else { "" },
            r.extension_ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
