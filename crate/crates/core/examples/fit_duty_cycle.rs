//! Fit the log duty-cycle model to a duty sweep read from CSV.

use std::path::Path;

use bti_aging::fitting::{fit_dutycycle, FitOptions};
use bti_aging::io::read_duty_csv;
use bti_aging::models::dutycycle_eval;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/duty_sweep.csv");
    let input = read_duty_csv(&path)?;
    let rows: Vec<_> = input.rows.into_iter().map(|(_, s)| s).collect();
    let fit = fit_dutycycle(&rows, FitOptions::default())?;
    println!("A = {:.5} V, B = {:.5}", fit.params.a, fit.params.b);
    println!("{}", fit.search_trace_summary);
    println!("{:>6} {:>10} {:>10}", "duty", "data_mV", "model_mV");
    for s in &rows {
        println!("{:>6.2} {:>10.3} {:>10.3}", s.duty, s.delta_vt_mag * 1e3, dutycycle_eval(&fit.params, s.duty)? * 1e3);
    }
    Ok(())
}
