//! Density-matrix helpers shared by the heralding and analysis modules.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Fock-basis density matrix of a single mode, indexed `0..=cutoff`.
pub type DensityMatrix = DMatrix<C64>;

/// Summary of how far a matrix is from being a valid density matrix.
#[derive(Debug, Clone, Copy)]
pub struct DensityCheck {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityCheck {
    pub fn is_valid(&self) -> bool {
        self.trace_error <= 1e-10 && self.hermiticity_error <= 1e-12 && self.min_eigenvalue >= -1e-9
    }
}

pub fn check_density(rho: &DensityMatrix) -> DensityCheck {
    let trace = rho.trace();
    let trace_error = (trace - C64::new(1.0, 0.0)).norm();
    let hermiticity_error = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_eigenvalue = hermitian_eigenvalues(rho).iter().cloned().fold(f64::INFINITY, f64::min);
    DensityCheck {
        trace_error,
        hermiticity_error,
        min_eigenvalue,
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Negative eigenvalues from round-off are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_part(m).symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two density matrices of
/// equal dimension.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::InvalidParameter(format!(
            "fidelity needs equal dimensions, got {:?} and {:?}",
            rho.shape(),
            sigma.shape()
        )));
    }
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let eig = hermitian_part(&inner).symmetric_eigenvalues();
    let tr: f64 = eig.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(tr * tr)
}

/// Pure-state projector `|v⟩⟨v| / ⟨v|v⟩`.
pub fn projector(v: &DVector<C64>) -> Result<DensityMatrix> {
    let n = v.norm_squared();
    if n <= 0.0 {
        return Err(Error::ZeroNorm("state vector"));
    }
    Ok(v * v.adjoint() / C64::new(n, 0.0))
}

/// Embed or truncate a density matrix into dimension `dim`.
pub fn resize(rho: &DensityMatrix, dim: usize) -> DensityMatrix {
    let mut out = DMatrix::zeros(dim, dim);
    let k = dim.min(rho.nrows());
    out.view_mut((0, 0), (k, k)).copy_from(&rho.view((0, 0), (k, k)));
    out
}

/// Photon-number distribution `ρ_nn`.
pub fn populations(rho: &DensityMatrix) -> Vec<f64> {
    (0..rho.nrows()).map(|n| rho[(n, n)].re).collect()
}

/// Pure-loss channel with transmission `eta`, applied through its Kraus
/// operators `E_k |n⟩ = √(C(n,k) η^(n-k) (1-η)^k) |n-k⟩`.
pub fn pure_loss(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("transmission {eta} outside [0, 1]")));
    }
    let d = rho.nrows();
    if eta == 1.0 {
        return Ok(rho.clone());
    }
    let amp = loss_amplitudes(d, eta);
    let mut out = DMatrix::zeros(d, d);
    for k in 0..d {
        for m in k..d {
            for n in k..d {
                let w = amp[m][k] * amp[n][k];
                if w != 0.0 {
                    out[(m - k, n - k)] += rho[(m, n)] * w;
                }
            }
        }
    }
    Ok(out)
}

/// `amp[n][k] = √(C(n,k) η^(n-k) (1-η)^k)`, evaluated in log space.
pub fn loss_amplitudes(dim: usize, eta: f64) -> Vec<Vec<f64>> {
    let ln_fact = ln_factorials(dim + 1);
    (0..dim)
        .map(|n| {
            (0..dim)
                .map(|k| {
                    if k > n {
                        return 0.0;
                    }
                    let log_c = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
                    let a = if n - k == 0 { 0.0 } else { (n - k) as f64 * eta.ln() };
                    let b = if k == 0 { 0.0 } else { k as f64 * (1.0 - eta).ln() };
                    let v = log_c + a + b;
                    if v.is_finite() {
                        (0.5 * v).exp()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Parity expectation `⟨(-1)^n⟩`.
pub fn parity(rho: &DensityMatrix) -> f64 {
    (0..rho.nrows())
        .map(|n| if n % 2 == 0 { rho[(n, n)].re } else { -rho[(n, n)].re })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fock(n: usize, dim: usize) -> DensityMatrix {
        let mut r = DMatrix::zeros(dim, dim);
        r[(n, n)] = C64::new(1.0, 0.0);
        r
    }

    #[test]
    fn single_photon_through_half_loss() {
        let out = pure_loss(&fock(1, 4), 0.5).unwrap();
        assert!((out[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((out[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(check_density(&out).is_valid());
    }

    #[test]
    fn loss_extremes() {
        let rho = fock(3, 6);
        assert_eq!(pure_loss(&rho, 1.0).unwrap(), rho);
        let vac = pure_loss(&rho, 0.0).unwrap();
        assert!((vac[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(pure_loss(&rho, 1.5).is_err());
    }

    #[test]
    fn fidelity_of_orthogonal_and_equal_states() {
        let a = fock(0, 3);
        let b = fock(1, 3);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-12);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let mixed = (a.clone() + b.clone()) * C64::new(0.5, 0.0);
        assert!((fidelity(&a, &mixed).unwrap() - 0.5).abs() < 1e-12);
    }
}
