//! Fock amplitudes `⟨n₁…n_M|G⟩` of a pure Gaussian state.
//!
//! The amplitudes are Taylor coefficients of the generating function
//! `F(z) = C exp(½ zᵀBz + bᵀz)`, evaluated with the recurrence
//! `√nᵢ c(n) = bᵢ c(n-eᵢ) + Σⱼ Bᵢⱼ √(nⱼ-δᵢⱼ) c(n-eᵢ-eⱼ)`.

use nalgebra::{DMatrix, DVector};

use crate::gaussian::GaussianState;
use crate::{Error, Result, C64};

pub const MAX_MODES: usize = 3;
pub const MAX_CUTOFF: usize = 30;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-4;

/// Amplitudes on the box `0 ≤ nᵢ ≤ cutoff`, stored row-major with mode 0
/// slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct FockAmplitudes {
    pub cutoff: usize,
    pub n_modes: usize,
    pub tensor: Vec<C64>,
    /// `1 - Σ|c|²` over the box.
    pub tail: f64,
}

impl FockAmplitudes {
    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn index(&self, n: &[usize]) -> usize {
        n.iter().fold(0, |acc, &k| acc * self.dim() + k)
    }

    pub fn get(&self, n: &[usize]) -> C64 {
        self.tensor[self.index(n)]
    }
}

/// Complex-form parameters `(B, b, C)` of the generating function.
pub struct GeneratingFunction {
    pub b_mat: DMatrix<C64>,
    pub b_vec: DVector<C64>,
    pub prefactor: f64,
}

pub fn generating_function(state: &GaussianState) -> Result<GeneratingFunction> {
    let m = state.n_modes();
    let v = state.cov();
    let d = state.mean();
    let xx = |i: usize, j: usize| v[(2 * i, 2 * j)];
    let pp = |i: usize, j: usize| v[(2 * i + 1, 2 * j + 1)];
    let xp = |i: usize, j: usize| v[(2 * i, 2 * j + 1)];
    let px = |i: usize, j: usize| v[(2 * i + 1, 2 * j)];
    let mm = DMatrix::from_fn(m, m, |k, i| {
        C64::new(0.5 * (xx(k, i) - pp(k, i)), 0.5 * (xp(k, i) + px(k, i)))
    });
    let nn = DMatrix::from_fn(m, m, |k, j| {
        let delta = if k == j { 0.5 } else { 0.0 };
        C64::new(0.5 * (xx(k, j) + pp(k, j)) + delta, 0.5 * (px(k, j) - xp(k, j)))
    });
    let nt_inv = nn
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("singular covariance block".into()))?;
    let b_mat = &mm * nt_inv;
    let b_mat = (&b_mat + b_mat.transpose()) * C64::new(0.5, 0.0);
    let beta = DVector::from_fn(m, |i, _| C64::new(d[2 * i], d[2 * i + 1]) / 2f64.sqrt());
    let b_vec = &beta - &b_mat * beta.map(|z| z.conj());

    let shifted = v + DMatrix::identity(2 * m, 2 * m) * 0.5;
    let det = shifted.determinant();
    let inv = shifted
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("singular covariance".into()))?;
    let quad = (d.transpose() * inv * d)[(0, 0)];
    let prefactor = (det.powf(-0.5) * (-0.5 * quad).exp()).sqrt();
    Ok(GeneratingFunction {
        b_mat,
        b_vec,
        prefactor,
    })
}

/// Fock amplitudes of a pure Gaussian state with at most three modes.
pub fn fock_amplitudes(state: &GaussianState, cutoff: usize) -> Result<FockAmplitudes> {
    fock_amplitudes_with_tolerance(state, cutoff, DEFAULT_TAIL_TOLERANCE)
}

pub fn fock_amplitudes_with_tolerance(state: &GaussianState, cutoff: usize, tolerance: f64) -> Result<FockAmplitudes> {
    let m = state.n_modes();
    if m == 0 || m > MAX_MODES {
        return Err(Error::TooManyModes {
            modes: m,
            max: MAX_MODES,
        });
    }
    if cutoff > MAX_CUTOFF {
        return Err(Error::CutoffTooLarge {
            cutoff,
            max: MAX_CUTOFF,
        });
    }
    let det = state.symplectic_purity();
    if (det - 1.0).abs() > 1e-8 {
        return Err(Error::NotPure { det });
    }
    let gf = generating_function(state)?;
    let dim = cutoff + 1;
    let total = dim.pow(m as u32);
    let mut c = vec![C64::new(0.0, 0.0); total];
    c[0] = C64::new(gf.prefactor, 0.0);
    let strides: Vec<usize> = (0..m).map(|i| dim.pow((m - 1 - i) as u32)).collect();
    let sqrt: Vec<f64> = (0..=dim).map(|k| (k as f64).sqrt()).collect();
    let mut n = vec![0usize; m];
    for idx in 1..total {
        let mut rem = idx;
        for i in 0..m {
            n[i] = rem / strides[i];
            rem %= strides[i];
        }
        let i = n.iter().position(|&k| k > 0).unwrap_or(0);
        let prev = idx - strides[i];
        let mut acc = gf.b_vec[i] * c[prev];
        n[i] -= 1;
        for j in 0..m {
            if n[j] > 0 {
                acc += gf.b_mat[(i, j)] * sqrt[n[j]] * c[prev - strides[j]];
            }
        }
        n[i] += 1;
        c[idx] = acc / sqrt[n[i]];
    }
    let mass: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let tail = 1.0 - mass;
    if tail > tolerance {
        return Err(Error::TruncationTail {
            tail,
            tolerance,
            cutoff,
        });
    }
    Ok(FockAmplitudes {
        cutoff,
        n_modes: m,
        tensor: c,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::BeamSplitterSpec;

    fn single() -> GaussianState {
        GaussianState::vacuum_abstract(&[1]).unwrap()
    }

    #[test]
    fn vacuum_amplitudes() {
        let a = fock_amplitudes(&single(), 5).unwrap();
        assert_eq!(a.get(&[0]), C64::new(1.0, 0.0));
        assert!(a.tensor[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn coherent_state() {
        let st = single().displace(0, 0, C64::new(1.0, 0.0)).unwrap();
        let a = fock_amplitudes(&st, 20).unwrap();
        let mut fact = 1.0;
        for n in 0..=20usize {
            if n > 0 {
                fact *= n as f64;
            }
            let expected = (-0.5f64).exp() / fact.sqrt();
            assert!((a.get(&[n]) - C64::new(expected, 0.0)).norm() < 1e-14, "{n}");
        }
    }

    #[test]
    fn squeezed_vacuum_ratio() {
        let st = single().squeeze_mode(0, 0, 0.5).unwrap();
        let a = fock_amplitudes(&st, 20).unwrap();
        let ratio = (a.get(&[2]) / a.get(&[0])).norm();
        assert!((ratio - 0.5f64.tanh() / 2f64.sqrt()).abs() < 1e-14);
        assert!((a.get(&[0]).re - 1.0 / 0.5f64.cosh().sqrt()).abs() < 1e-14);
        assert!(a.get(&[1]).norm() == 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let big = GaussianState::vacuum_abstract(&[2, 2]).unwrap();
        assert!(matches!(fock_amplitudes(&big, 4), Err(Error::TooManyModes { .. })));
        assert!(matches!(
            fock_amplitudes(&single(), 31),
            Err(Error::CutoffTooLarge { .. })
        ));
        let lossy = single().squeeze_mode(0, 0, 0.5).unwrap().loss(0, 0, 0.5).unwrap();
        assert!(matches!(fock_amplitudes(&lossy, 10), Err(Error::NotPure { .. })));
        let hot = single().squeeze_mode(0, 0, 2.0).unwrap();
        assert!(matches!(fock_amplitudes(&hot, 6), Err(Error::TruncationTail { .. })));
    }

    #[test]
    fn two_mode_norm_close_to_one() {
        let st = GaussianState::vacuum_abstract(&[1, 1])
            .unwrap()
            .squeeze_mode(0, 0, 0.4)
            .unwrap()
            .beam_split(&BeamSplitterSpec::new(0.9, 0.3, -0.2), 0, 1)
            .unwrap()
            .displace(1, 0, C64::new(0.2, -0.1))
            .unwrap();
        let a = fock_amplitudes(&st, 25).unwrap();
        assert!(a.tail.abs() < 1e-10, "{}", a.tail);
    }
}
