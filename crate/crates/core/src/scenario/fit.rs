use serde::Serialize;

use crate::analysis::{best_cat, cat_fidelity, negativity_at_origin, Parity};
use crate::herald::{apply_imperfections, photon_subtract, HeraldedState, ImperfectionModel};
use crate::{Error, Result, C64};

/// Figures of merit of a heralded single-mode state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateMetrics {
    pub w0: f64,
    pub best_alpha: f64,
    pub best_fidelity: f64,
    /// Fidelity against the cat at the reference amplitude.
    pub fidelity_at_reference: f64,
    pub reference_alpha: f64,
}

pub fn parity_of(pattern_total: usize) -> Parity {
    if pattern_total % 2 == 1 {
        Parity::Odd
    } else {
        Parity::Even
    }
}

pub fn state_metrics(hs: &HeraldedState, reference_alpha: f64) -> Result<StateMetrics> {
    let parity = parity_of(hs.provenance.pattern.iter().sum());
    let (best_alpha, best_fidelity) = best_cat(&hs.rho, parity)?;
    Ok(StateMetrics {
        w0: negativity_at_origin(&hs.rho),
        best_alpha,
        best_fidelity,
        fidelity_at_reference: cat_fidelity(&hs.rho, C64::new(reference_alpha, 0.0), parity)?,
        reference_alpha,
    })
}

fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut above: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const R_RANGE: (f64, f64) = (1e-3, 0.7);

/// Squeezing for which the lossless single-photon-subtracted state is best
/// matched by a cat of amplitude `alpha`.
pub fn fit_matched_r(alpha: f64, tap: f64, cutoff: usize) -> Result<f64> {
    fit_r(alpha, tap, cutoff, &ImperfectionModel::ideal())
}

fn fit_r(alpha: f64, tap: f64, cutoff: usize, imp: &ImperfectionModel) -> Result<f64> {
    bisect(R_RANGE.0, R_RANGE.1, 1e-9, |r| {
        let hs = apply_imperfections(&photon_subtract(r, tap, 1, cutoff)?, imp)?;
        Ok(best_cat(&hs.rho, Parity::Odd)?.0 > alpha)
    })
}

/// Loss budget reproducing a target `W(0,0)` and best-cat amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossFit {
    pub r: f64,
    pub eta_state: f64,
    pub metrics: StateMetrics,
}

/// Alternately fit `r` (best α = `alpha`) and `eta_state` (`W(0,0) = w0`)
/// with the remaining fields of `template` held fixed.
pub fn fit_loss_budget(w0: f64, alpha: f64, tap: f64, cutoff: usize, template: &ImperfectionModel) -> Result<LossFit> {
    let mut imp = *template;
    let mut r = fit_matched_r(alpha, tap, cutoff)?;
    for _ in 0..60 {
        let hs = photon_subtract(r, tap, 1, cutoff)?;
        let w_at = |eta: f64| -> Result<f64> {
            let mut m = imp;
            m.eta_state = eta;
            Ok(negativity_at_origin(&apply_imperfections(&hs, &m)?.rho))
        };
        if w_at(1.0)? > w0 {
            return Err(Error::InvalidParameter(format!(
                "W(0,0) = {w0} is out of reach even without state loss at r = {r}"
            )));
        }
        let eta = bisect(1e-3, 1.0, 1e-12, |e| Ok(w_at(e)? < w0))?;
        imp.eta_state = eta;
        let next_r = fit_r(alpha, tap, cutoff, &imp)?;
        let done = (next_r - r).abs() < 1e-8;
        r = next_r;
        if done {
            break;
        }
    }
    let hs = apply_imperfections(&photon_subtract(r, tap, 1, cutoff)?, &imp)?;
    Ok(LossFit {
        r,
        eta_state: imp.eta_state,
        metrics: state_metrics(&hs, alpha)?,
    })
}
