//! Simulate heralded homodyne traces and recover the temporal mode by PCA
//! of the trace autocorrelation.

use qawg::analysis::{estimate_waveform, pca_estimate, simulate_records, RecordKind};
use qawg::modes::mode_match;
use qawg::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Scenario::experiment_balanced_time_bin();
    let ideal = s.ideal_state()?;
    let imp = s.config.imperfections;
    let pre = qawg::herald::apply_imperfections(&ideal, &imp.without_homodyne())?;
    let grid = s.record_grid()?;
    let f = s.target_mode(&grid)?;
    let mut cfg = s.simulation_config();
    cfg.n_events = 5000;
    cfg.n_vacuum = 5000;

    let set = simulate_records(&pre, &f, &cfg, &imp)?;
    let vac = set.of_kind(RecordKind::VacuumReference);
    let mut per_phase = Vec::new();
    for th in set.phases() {
        let p = pca_estimate(&set.heralded_at(th), &vac, &set.grid)?;
        println!(
            "theta {:>5.1} deg: lambda = {:.3} {:.3} {:.3}, gap ratio {:.1}, match {:.4}",
            th.to_degrees(),
            p.eigenvalues[0],
            p.eigenvalues[1],
            p.eigenvalues[2],
            p.gap_ratio(),
            mode_match(&p.eigenfunctions[0], &f)?
        );
        per_phase.push(p);
    }
    let w = estimate_waveform(&per_phase)?;
    println!("averaged waveform match with theory: {:.5}", mode_match(&w, &f)?);
    Ok(())
}
