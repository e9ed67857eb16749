//! Interface-trap density from subthreshold swing.

use bti_aging::analysis::{dit_from_subthreshold, ideal_subthreshold_swing};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c_ox = 1.5e-6;
    println!("ideal swing at 300 K: {:.2} mV/dec", ideal_subthreshold_swing(300.0));
    for ss in [60.0, 90.0, 150.0, 300.0] {
        let d = dit_from_subthreshold(ss, 300.0, c_ox)?;
        println!("SS {ss:>5} mV/dec -> D_it {:.3e} cm^-2 eV^-1", d.d_it);
    }
    Ok(())
}
