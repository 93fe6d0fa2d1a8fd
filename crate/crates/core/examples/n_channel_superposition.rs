//! Superposition of 0, 1 and 2 photons heralded from a displaced EPR
//! state: the idler is split in two, each half displaced, and one photon
//! is detected in each.

use nalgebra::DVector;
use qawg::analysis::negativity_at_origin;
use qawg::gaussian::{BeamSplitterSpec, GaussianState};
use qawg::herald::{fock_amplitudes, herald_project};
use qawg::linalg::populations;
use qawg::C64;

fn main() -> qawg::Result<()> {
    let state = GaussianState::vacuum_abstract(&[1, 1, 1])?
        .epr_pair(0, 0, 1, 0, 0.3)?
        .beam_split(&BeamSplitterSpec::balanced(), 1, 2)?;
    let amps = fock_amplitudes(&state, 10)?;

    for (b1, b2) in [(0.0, 0.0), (0.3, -0.3), (0.3, 0.3), (0.5, -0.2)] {
        let shifted = state
            .displace(1, 0, C64::new(b1, 0.0))?
            .displace(2, 0, C64::new(b2, 0.0))?;
        let hs = herald_project(&fock_amplitudes(&shifted, 10)?, &[1, 1])?;
        let pops = populations(&hs.rho);
        let low: f64 = pops[..3].iter().sum();
        println!(
            "displacements ({b1:+.1}, {b2:+.1}): p = {:.2e}, P(0..2) = [{:.3}, {:.3}, {:.3}] (sum {low:.4}), W(0,0) = {:+.4}",
            hs.p_success,
            pops[0],
            pops[1],
            pops[2],
            negativity_at_origin(&hs.rho)
        );
    }

    let top = DVector::from_fn(amps.dim(), |n, _| amps.get(&[n, 1, 1]));
    println!("undisplaced (1,1) amplitude on |2>: {:.4}", top[2].norm() / top.norm());
    Ok(())
}
