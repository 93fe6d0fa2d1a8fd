//! Build the cavity + interferometer cascades for both waveforms and
//! compare their detection modes with the target waveforms.

use qawg::filters::{compose, detection_mode, fir_response, iir_response, two_port_complete, FirStage, IirStage};
use qawg::modes::{make_balanced_time_bin, make_time_bin, mode_match, TimeGrid, WaveformParams};

fn main() -> qawg::Result<()> {
    let grid = TimeGrid::standard();
    let p = WaveformParams::experiment();
    let iir = iir_response(&IirStage::experiment(), &grid)?;

    for (name, fir, target) in [
        ("time bin", FirStage::time_bin(&p), make_time_bin(&p, &grid)?),
        (
            "balanced time bin",
            FirStage::balanced_time_bin(&p),
            make_balanced_time_bin(&p, &grid)?,
        ),
    ] {
        let g = compose(&iir, &fir_response(&fir, &grid)?)?;
        let f = detection_mode(&g)?;
        let completed = two_port_complete(&g)?;
        println!("{name}");
        println!("  arms kappa = {:?}, theta = {:?}", fir.kappas, fir.thetas);
        println!(
            "  max |g(w)| = {:.6}, causality violation = {:.1e}",
            g.max_gain(),
            g.causality_violation()
        );
        println!("  two-port error = {:.1e}", completed.passivity_error().unwrap_or(0.0));
        println!("  mode match with target = {:.9}", mode_match(&f, &target)?);
    }
    Ok(())
}
