//! The degree-zero symbol `m0` and the per-frequency transference identities.

use ncbmo::symbols::{m0_eval, m0_profile, transference_defect};

fn main() -> ncbmo::Result<()> {
    for k in 0..8 {
        let theta = k as f64 * std::f64::consts::PI / 8.0;
        println!("m0 at angle {theta:.3}: {:+.6}", m0_profile(theta));
    }
    println!("m0(3, 1) = {}, m0(30, 10) = {}", m0_eval(3.0, 1.0), m0_eval(30.0, 10.0));

    let spectrum = [-2.0, -0.5, 0.1, 1.0, 2.5];
    let report = transference_defect(|x| x.abs().min(1.0), &spectrum, 0.5)?;
    println!("heat defect {:e}, multiplier defect {:e}", report.heat_defect, report.multiplier_defect);
    Ok(())
}
