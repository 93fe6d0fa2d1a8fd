use nalgebra::DMatrix;
use serde::Serialize;

use super::phase_space::hermite_functions;
use crate::herald::MAX_CUTOFF;
use crate::linalg::{hermitian_part, loss_amplitudes, DensityMatrix};
use crate::{Error, Result, C64};

pub const MIN_TOMOGRAPHY_SAMPLES: usize = 1000;
pub const BINS_PER_PHASE: usize = 400;
pub const MAX_ITERATIONS: usize = 2000;
pub const LL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct TomographyResult {
    #[serde(skip)]
    pub rho: DensityMatrix,
    /// Detector efficiency folded into the POVM (1 means no correction).
    pub eta: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Mean log-likelihood per sample (density units).
    pub log_likelihood: f64,
    pub n_samples: usize,
    pub n_phases: usize,
    pub warnings: Vec<String>,
}

struct Bin {
    weight: f64,
    povm: DMatrix<C64>,
}

/// Distinct phases with their sample values.
fn group_by_phase(samples: &[(f64, f64)]) -> Vec<(f64, Vec<f64>)> {
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for (th, x) in sorted {
        match groups.last_mut() {
            Some((t, xs)) if (th - *t).abs() < 1e-9 => xs.push(x),
            _ => groups.push((th, vec![x])),
        }
    }
    groups
}

/// `⟨m|Π_η(x,θ)|n⟩ = e^(i(m-n)θ) Σ_k A(m,k) A(n,k) ψ_(m-k)(x) ψ_(n-k)(x)`.
fn lossy_povm(theta: f64, x: f64, amp: &[Vec<f64>]) -> DMatrix<C64> {
    let d = amp.len();
    let psi = hermite_functions(x, d - 1);
    let ph: Vec<C64> = (0..d).map(|m| C64::from_polar(1.0, m as f64 * theta)).collect();
    let mut out = DMatrix::zeros(d, d);
    for m in 0..d {
        for n in m..d {
            let s: f64 = (0..=m).map(|k| amp[m][k] * amp[n][k] * psi[m - k] * psi[n - k]).sum();
            if s != 0.0 {
                let v = ph[m] * ph[n].conj() * s;
                out[(m, n)] = v;
                out[(n, m)] = v.conj();
            }
        }
    }
    out
}

fn probability(rho: &DensityMatrix, povm: &DMatrix<C64>) -> f64 {
    rho.iter().zip(povm.iter()).map(|(r, p)| (r * p.conj()).re).sum()
}

/// Maximum-likelihood state from `(θ, x)` quadrature samples.
///
/// Samples are histogrammed per phase; the `RρR` iteration runs over the
/// loss-adjusted POVM with detector efficiency `eta`.
pub fn mle_tomography(samples: &[(f64, f64)], cutoff: usize, eta: f64) -> Result<TomographyResult> {
    if samples.len() < MIN_TOMOGRAPHY_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "tomography needs at least {MIN_TOMOGRAPHY_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "detector efficiency {eta} outside (0, 1]"
        )));
    }
    if cutoff == 0 || cutoff > MAX_CUTOFF {
        return Err(Error::CutoffTooLarge {
            cutoff,
            max: MAX_CUTOFF,
        });
    }
    if samples.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite quadrature sample".into()));
    }
    let d = cutoff + 1;
    let amp = loss_amplitudes(d, eta);
    let groups = group_by_phase(samples);
    let mut warnings = Vec::new();
    if groups.len() < 3 {
        warnings.push(format!(
            "samples span only {} distinct LO phase(s); reconstruction unidentifiable up to phase-insensitive mixtures",
            groups.len()
        ));
    }
    let total = samples.len() as f64;
    let mut bins = Vec::new();
    for (theta, xs) in &groups {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = ((hi - lo) / BINS_PER_PHASE as f64).max(1e-9);
        let mut counts = vec![0usize; BINS_PER_PHASE];
        for x in xs {
            let i = (((x - lo) / width) as usize).min(BINS_PER_PHASE - 1);
            counts[i] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                bins.push(Bin {
                    weight: c as f64 / total,
                    povm: lossy_povm(*theta, lo + (i as f64 + 0.5) * width, &amp),
                });
            }
        }
    }
    let mut rho = DMatrix::<C64>::identity(d, d) / C64::new(d as f64, 0.0);
    let log_likelihood = |rho: &DensityMatrix| -> f64 {
        bins.iter()
            .map(|b| b.weight * probability(rho, &b.povm).max(1e-300).ln())
            .sum()
    };
    let mut ll = log_likelihood(&rho);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let mut r = DMatrix::<C64>::zeros(d, d);
        for b in &bins {
            let p = probability(&rho, &b.povm).max(1e-300);
            r += &b.povm * C64::new(b.weight / p, 0.0);
        }
        let next = &r * &rho * &r;
        let tr = next.trace().re;
        rho = hermitian_part(&(next / C64::new(tr, 0.0)));
        iterations += 1;
        let new_ll = log_likelihood(&rho);
        let gain = new_ll - ll;
        ll = new_ll;
        if gain.abs() < LL_TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(TomographyResult {
        rho,
        eta,
        iterations,
        converged,
        log_likelihood: ll,
        n_samples: samples.len(),
        n_phases: groups.len(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::stats::InverseCdf;
    use crate::analysis::{marginal, negativity_at_origin};
    use crate::linalg::{check_density, fidelity, pure_loss};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn draw(rho: &DensityMatrix, phases: &[f64], per_phase: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_with(rho, phases, per_phase, |_| rng.random())
    }

    /// Quantiles `(i + 1/2)/n`: the sample set with no shot noise.
    fn stratified(rho: &DensityMatrix, phases: &[f64], per_phase: usize) -> Vec<(f64, f64)> {
        sample_with(rho, phases, per_phase, |i| (i as f64 + 0.5) / per_phase as f64)
    }

    fn sample_with(
        rho: &DensityMatrix,
        phases: &[f64],
        per_phase: usize,
        mut u: impl FnMut(usize) -> f64,
    ) -> Vec<(f64, f64)> {
        let xs: Vec<f64> = (0..4096).map(|i| -9.0 + 18.0 * i as f64 / 4095.0).collect();
        let mut out = Vec::new();
        for &t in phases {
            let inv = InverseCdf::from_density(&xs, &marginal(rho, t, &xs)).unwrap();
            for i in 0..per_phase {
                out.push((t, inv.sample(u(i))));
            }
        }
        out
    }

    fn six() -> Vec<f64> {
        (0..6).map(|k| k as f64 * std::f64::consts::PI / 6.0).collect()
    }

    #[test]
    fn vacuum_reconstruction() {
        let mut vac = DMatrix::zeros(9, 9);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let s = stratified(&vac, &six(), 10_002 / 6);
        let t = mle_tomography(&s, 8, 1.0).unwrap();
        assert!(check_density(&t.rho).is_valid());
        let fid = fidelity(&t.rho, &vac).unwrap();
        assert!(fid >= 0.999, "{fid}");
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn vacuum_reconstruction_with_shot_noise() {
        let mut vac = DMatrix::zeros(9, 9);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let s = draw(&vac, &six(), 10_002 / 6, 3);
        let t = mle_tomography(&s, 8, 1.0).unwrap();
        // excess photon number resolvable from N samples: sd of mean x² is √(0.5/N)
        let bound = 3.0 * (0.5 / s.len() as f64).sqrt();
        assert!(fidelity(&t.rho, &vac).unwrap() >= 1.0 - 2.0 * bound);
    }

    #[test]
    fn loss_correction_deepens_negativity() {
        let mut one = DMatrix::zeros(8, 8);
        one[(1, 1)] = C64::new(1.0, 0.0);
        let lossy = pure_loss(&one, 0.8).unwrap();
        let s = draw(&lossy, &six(), 2000, 5);
        let plain = mle_tomography(&s, 7, 1.0).unwrap();
        let corrected = mle_tomography(&s, 7, 0.8).unwrap();
        assert!(negativity_at_origin(&corrected.rho) < negativity_at_origin(&plain.rho));
        assert!(fidelity(&plain.rho, &lossy).unwrap() > 0.99);
        assert!(check_density(&corrected.rho).is_valid());
    }

    #[test]
    fn single_phase_warns_and_small_input_errors() {
        let mut vac = DMatrix::zeros(5, 5);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let s = draw(&vac, &[0.0], 1200, 1);
        let t = mle_tomography(&s, 4, 1.0).unwrap();
        assert_eq!(t.warnings.len(), 1);
        assert!(t.warnings[0].contains("1 distinct LO phase"));
        assert!(matches!(
            mle_tomography(&s[..500], 4, 1.0),
            Err(Error::InsufficientData(_))
        ));
        assert!(mle_tomography(&s, 4, 0.0).is_err());
    }
}
