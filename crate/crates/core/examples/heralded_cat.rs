//! Photon subtraction from squeezed vacuum: the ideal state is close to an
//! odd cat; losses and fake heralds wash out the negativity.

use qawg::analysis::{best_cat, negativity_at_origin, Parity};
use qawg::herald::{apply_imperfections, photon_subtract, success_rate, ImperfectionModel};
use qawg::scenario::fit_matched_r;

fn main() -> qawg::Result<()> {
    let tap = 0.05;
    let r = fit_matched_r(0.94, tap, 15)?;
    let ideal = photon_subtract(r, tap, 1, 15)?;
    let (alpha, fid) = best_cat(&ideal.rho, Parity::Odd)?;
    println!("squeezing r = {r:.6}");
    println!(
        "ideal: W(0,0) = {:.4}, best odd cat alpha = {alpha:.3}, F = {fid:.4}",
        negativity_at_origin(&ideal.rho)
    );

    for eta_state in [1.0, 0.9, 0.8, 0.7] {
        let imp = ImperfectionModel {
            eta_state,
            fake_rate_fraction: 0.02,
            ..ImperfectionModel::default()
        };
        let lossy = apply_imperfections(&ideal, &imp)?;
        let (a, f) = best_cat(&lossy.rho, Parity::Odd)?;
        println!(
            "eta_state {eta_state:.2}: W(0,0) = {:+.4}, alpha = {a:.3}, F = {f:.4}",
            negativity_at_origin(&lossy.rho)
        );
    }
    println!("herald rate ~ {:.0} counts/s", success_rate(&ideal, 8.2e6)?);

    let two = photon_subtract(r, tap, 2, 15)?;
    let (a2, f2) = best_cat(&two.rho, Parity::Even)?;
    println!("two clicks: even cat alpha = {a2:.3}, F = {f2:.4}");
    Ok(())
}
