//! Maximum-likelihood reconstruction from quadrature samples, with and
//! without correcting the homodyne loss.

use qawg::analysis::{mle_tomography, negativity_at_origin, project_records, simulate_records, RecordKind};
use qawg::linalg::{fidelity, resize};
use qawg::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::experiment_time_bin();
    let ideal = s.ideal_state()?;
    let imp = s.config.imperfections;
    let measured = s.measured_state(&ideal)?;
    let pre = qawg::herald::apply_imperfections(&ideal, &imp.without_homodyne())?;
    let f = s.target_mode(&s.record_grid()?)?;
    let mut cfg = s.simulation_config();
    cfg.n_events = 10_000;

    let set = simulate_records(&pre, &f, &cfg, &imp)?;
    let samples = project_records(&set.of_kind(RecordKind::Heralded), &f)?;
    println!("{} samples over {} phases", samples.len(), set.phases().len());

    // the corrected reconstruction is compared with the state before homodyne loss
    for (eta, reference) in [(1.0, &measured.rho), (imp.eta_homodyne, &pre.rho)] {
        let t = mle_tomography(&samples, 15, eta)?;
        let d = t.rho.nrows().max(reference.nrows());
        println!(
            "eta {eta:.2}: {} iterations, W(0,0) = {:+.4} (input {:+.4}), F = {:.4}",
            t.iterations,
            negativity_at_origin(&t.rho),
            negativity_at_origin(reference),
            fidelity(&resize(&t.rho, d), &resize(reference, d))?
        );
    }
    Ok(())
}
