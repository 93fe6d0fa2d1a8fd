//! Does broadband squeezing factorize into the detected mode and its
//! orthogonal complement? Compare the overlap criterion with the actual
//! cross-covariance after the Gaussian pipeline.

use std::f64::consts::PI;

use qawg::gaussian::{purity_complex, purity_real, GaussianState, SqueezingSpectrum};
use qawg::modes::{complete_basis, make_time_bin, ModeFunction, TimeGrid, WaveformParams};

fn main() -> qawg::Result<()> {
    let grid = TimeGrid::standard();
    let p = WaveformParams::experiment();
    let f = make_time_bin(&p, &grid)?;
    let basis = complete_basis(&f, 6)?;
    let conj: Vec<ModeFunction> = basis.iter().map(ModeFunction::conj).collect();

    let gamma = 2.0 * PI * 8.2e6;
    for spec in [
        SqueezingSpectrum::Flat { r: 0.5 },
        SqueezingSpectrum::Lorentzian {
            r: 0.5,
            hwhm: 1e4 * gamma,
        },
        SqueezingSpectrum::Lorentzian {
            r: 0.5,
            hwhm: 10.0 * gamma,
        },
        SqueezingSpectrum::Lorentzian { r: 0.5, hwhm: gamma },
    ] {
        let single = GaussianState::vacuum_with_bases(vec![basis.clone()])?.squeeze_broadband(0, &spec)?;
        let epr = GaussianState::vacuum_with_bases(vec![basis.clone(), conj.clone()])?.epr_broadband(0, 1, &spec)?;
        println!("{spec:?}");
        println!(
            "  M  = {:.8}  coupling to other modes {:.2e}",
            purity_real(&f, &spec)?,
            single.max_coupling_to_others(0, &[])
        );
        println!(
            "  M' = {:.8}  coupling outside the EPR pair {:.2e}",
            purity_complex(&f, &spec)?,
            epr.max_coupling_to_others(0, &[basis.len()])
        );
    }
    Ok(())
}
