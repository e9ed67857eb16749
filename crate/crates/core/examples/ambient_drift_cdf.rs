//! Per-device ambient drift with and without encapsulation.

use std::path::Path;

use bti_aging::analysis::{ambient_cdf, CdfMode};
use bti_aging::io::read_cdf_input;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut medians = Vec::new();
    for name in ["ambient_baseline.csv", "ambient_sinx.csv"] {
        let values = read_cdf_input(&data.join(name))?.rows;
        let cdf = ambient_cdf(&values, CdfMode::Magnitude)?;
        println!("{name}: n = {}, median {:.0} mV", cdf.n, cdf.median * 1e3);
        for (p, q) in &cdf.quantiles {
            println!("  p{:<4} {:>7.1} mV", p * 100.0, q * 1e3);
        }
        medians.push(cdf.median);
    }
    println!("improvement {:.2}x", medians[0] / medians[1]);
    Ok(())
}
