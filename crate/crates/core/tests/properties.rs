mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qawg::analysis::{marginal, negativity_at_origin, wigner, WignerGrid};
use qawg::gaussian::{BeamSplitterSpec, GaussianState};
use qawg::herald::{apply_imperfections, fock_amplitudes, herald_project, photon_subtract, ImperfectionModel};
use qawg::linalg::{check_density, fidelity, pure_loss};
use qawg::modes::{mode_match, ModeFunction, TimeGrid};
use qawg::C64;

fn pure_state(re: &[f64], im: &[f64]) -> DMatrix<C64> {
    let v = DVector::from_iterator(re.len(), re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)));
    let n = v.norm();
    let v = v / C64::new(n.max(1e-9), 0.0);
    &v * v.adjoint()
}

fn amplitudes(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0f64..1.0, d),
        prop::collection::vec(-1.0f64..1.0, d),
    )
        .prop_filter("nonzero", |(a, b)| a.iter().chain(b).any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mode_match_is_symmetric_and_phase_blind(
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        phase in 0.0f64..6.3,
    ) {
        let grid = TimeGrid::new(0.0, 0.5, 16).unwrap();
        let mk = |v: &[(f64, f64)]| ModeFunction::new(grid, v.iter().map(|&(r, i)| C64::new(r, i)).collect(), "p").unwrap();
        let (fa, fb) = (mk(&a), mk(&b));
        prop_assume!(fa.norm() > 1e-3 && fb.norm() > 1e-3);
        let m = mode_match(&fa, &fb).unwrap();
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert!((m - mode_match(&fb, &fa).unwrap()).abs() < 1e-12);
        let rotated = fa.scaled(C64::from_polar(1.0, phase));
        prop_assert!((m - mode_match(&rotated, &fb).unwrap()).abs() < 1e-12);
        prop_assert!((mode_match(&fa, &fa).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_keeps_density_valid((re, im) in amplitudes(8), eta in 0.0f64..=1.0) {
        let rho = pure_state(&re, &im);
        let out = pure_loss(&rho, eta).unwrap();
        prop_assert!(check_density(&out).is_valid());
        // mean photon number scales by eta
        let n = |r: &DMatrix<C64>| (0..r.nrows()).map(|k| k as f64 * r[(k, k)].re).sum::<f64>();
        prop_assert!((n(&out) - eta * n(&rho)).abs() < 1e-10);
    }

    #[test]
    fn wigner_origin_is_parity((re, im) in amplitudes(10)) {
        let rho = pure_state(&re, &im);
        prop_assert!((negativity_at_origin(&rho) - common::wigner_origin(&rho)).abs() < 1e-12);
        prop_assert!(negativity_at_origin(&rho).abs() <= 1.0 / std::f64::consts::PI + 1e-12);
    }

    #[test]
    fn marginals_are_normalized((re, im) in amplitudes(6), theta in 0.0f64..3.2) {
        let rho = pure_state(&re, &im);
        let xs: Vec<f64> = (0..2001).map(|i| -10.0 + 0.01 * i as f64).collect();
        let p = marginal(&rho, theta, &xs);
        prop_assert!(p.iter().all(|v| *v >= -1e-12));
        let total: f64 = p.iter().sum::<f64>() * 0.01;
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn imperfections_preserve_trace(
        r in 0.05f64..0.6,
        eta_state in 0.3f64..=1.0,
        q in 0.0f64..0.2,
        eta_h in 0.5f64..=1.0,
    ) {
        let hs = photon_subtract(r, 0.05, 1, 14).unwrap();
        let imp = ImperfectionModel { eta_state, fake_rate_fraction: q, eta_homodyne: eta_h, ..ImperfectionModel::default() };
        let out = apply_imperfections(&hs, &imp).unwrap();
        prop_assert!(check_density(&out.rho).is_valid());
        prop_assert!(negativity_at_origin(&out.rho) >= negativity_at_origin(&hs.rho) - 1e-12);
        prop_assert_eq!(out.p_success, hs.p_success);
    }

    #[test]
    fn mixers_conserve_energy_and_purity(
        r1 in -0.6f64..0.6, r2 in -0.6f64..0.6,
        kappa in 0.0f64..3.2, nu in -3.2f64..3.2, mu in -3.2f64..3.2,
    ) {
        let st = GaussianState::vacuum_abstract(&[1, 1]).unwrap()
            .squeeze_mode(0, 0, r1).unwrap()
            .squeeze_mode(1, 0, r2).unwrap();
        let mixed = st.beam_split(&BeamSplitterSpec::new(kappa, nu, mu), 0, 1).unwrap();
        prop_assert!((mixed.total_photon_number() - st.total_photon_number()).abs() < 1e-10);
        prop_assert!((mixed.symplectic_purity() - 1.0).abs() < 1e-9);
        prop_assert!(mixed.uncertainty_min_eigenvalue() > -1e-10);
    }

    #[test]
    fn herald_probabilities_sum_below_one(r in 0.05f64..0.5, tap in 0.02f64..0.5) {
        let st = GaussianState::vacuum_abstract(&[1, 1]).unwrap()
            .squeeze_mode(0, 0, -r).unwrap()
            .beam_split(&BeamSplitterSpec::tap(tap).unwrap(), 0, 1).unwrap();
        let amps = fock_amplitudes(&st, 14).unwrap();
        let total: f64 = (0..4).map(|n| herald_project(&amps, &[n]).unwrap().p_success).sum();
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert!(total > 0.99);
    }
}

#[test]
fn wigner_grid_integrates_to_one() {
    let hs = photon_subtract(0.4, 0.05, 1, 12).unwrap();
    let w = wigner(&hs.rho, &WignerGrid::for_cutoff(12, 161)).unwrap();
    assert!((w.integral() - 1.0).abs() < 1e-6);
    assert!(fidelity(&hs.rho, &hs.rho).unwrap() > 1.0 - 1e-9);
}
