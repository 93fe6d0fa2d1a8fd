use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::io::Meta;
use crate::linalg::DensityMatrix;
use crate::{Error, Result, C64};

/// Square phase-space window `[-x_max, x_max] × [-p_max, p_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGrid {
    pub x_max: f64,
    pub p_max: f64,
    pub resolution: usize,
}

impl WignerGrid {
    pub fn new(x_max: f64, p_max: f64, resolution: usize) -> Self {
        Self {
            x_max,
            p_max,
            resolution,
        }
    }

    /// Smallest symmetric window accepted for a Fock cutoff.
    pub fn required_extent(cutoff: usize) -> f64 {
        (2.0 * cutoff as f64).sqrt() + 1.0
    }

    pub fn for_cutoff(cutoff: usize, resolution: usize) -> Self {
        let e = Self::required_extent(cutoff) + 1.0;
        Self::new(e, e, resolution)
    }

    pub fn xs(&self) -> Vec<f64> {
        axis(self.x_max, self.resolution)
    }

    pub fn ps(&self) -> Vec<f64> {
        axis(self.p_max, self.resolution)
    }
}

fn axis(max: f64, n: usize) -> Vec<f64> {
    let step = 2.0 * max / (n - 1) as f64;
    (0..n).map(|i| -max + i as f64 * step).collect()
}

/// Wigner function sampled on a grid; `values[i][j]` is `W(xs[j], ps[i])`.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl WignerField {
    /// Trapezoidal `∬ W dx dp`.
    pub fn integral(&self) -> f64 {
        let dx = self.xs[1] - self.xs[0];
        let dp = self.ps[1] - self.ps[0];
        let w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let (nx, np) = (self.xs.len(), self.ps.len());
        let mut s = 0.0;
        for i in 0..np {
            for j in 0..nx {
                s += w(i, np) * w(j, nx) * self.values[i][j];
            }
        }
        s * dx * dp
    }

    pub fn min(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `x,p,W`.
    pub fn to_csv(&self, meta: &Meta) -> String {
        let mut out = meta.csv_header();
        out.push_str("x,p,W\n");
        for (i, p) in self.ps.iter().enumerate() {
            for (j, x) in self.xs.iter().enumerate() {
                let _ = writeln!(out, "{x},{p},{}", self.values[i][j]);
            }
        }
        out
    }
}

/// `W(x, p)` at a single phase-space point (Laguerre recurrence).
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    let d = rho.nrows();
    let a2 = C64::new(x, p) * 2f64.sqrt();
    let b = a2.norm_sqr();
    let mut wl = vec![C64::new(0.0, 0.0); d];
    wl[0] = C64::new((-0.5 * b).exp(), 0.0);
    let mut w = rho[(0, 0)].re * wl[0].re;
    for n in 1..d {
        wl[n] = a2 * wl[n - 1] / (n as f64).sqrt();
        w += 2.0 * (rho[(0, n)] * wl[n]).re;
    }
    for m in 1..d {
        let mut temp = wl[m];
        let sm = (m as f64).sqrt();
        wl[m] = (a2.conj() * temp - wl[m - 1] * sm) / sm;
        w += (rho[(m, m)] * wl[m]).re;
        for n in m + 1..d {
            let temp2 = (a2 * wl[n - 1] - temp * sm) / (n as f64).sqrt();
            temp = wl[n];
            wl[n] = temp2;
            w += 2.0 * (rho[(m, n)] * wl[n]).re;
        }
    }
    w / PI
}

/// Wigner function with `x = (a + a†)/√2`, vacuum `W(0,0) = 1/π`.
pub fn wigner(rho: &DensityMatrix, grid: &WignerGrid) -> Result<WignerField> {
    let need = WignerGrid::required_extent(rho.nrows() - 1);
    if grid.x_max < need || grid.p_max < need {
        return Err(Error::InvalidParameter(format!(
            "Wigner window ±{:.3}×±{:.3} is smaller than ±{need:.3} required for cutoff {}",
            grid.x_max,
            grid.p_max,
            rho.nrows() - 1
        )));
    }
    if grid.resolution < 3 {
        return Err(Error::InvalidParameter(
            "Wigner grid needs at least 3 points per axis".into(),
        ));
    }
    let xs = grid.xs();
    let ps = grid.ps();
    let values = ps
        .iter()
        .map(|&p| xs.iter().map(|&x| wigner_at(rho, x, p)).collect())
        .collect();
    Ok(WignerField { xs, ps, values })
}

/// `W(0,0) = (1/π) Σ (-1)^n ρ_nn`.
pub fn negativity_at_origin(rho: &DensityMatrix) -> f64 {
    crate::linalg::parity(rho) / PI
}

/// Harmonic-oscillator eigenfunctions `ψ_0..ψ_{n_max}` at `x` (vacuum
/// variance 1/2).
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut psi = vec![0.0; n_max + 1];
    psi[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n_max >= 1 {
        psi[1] = 2f64.sqrt() * x * psi[0];
    }
    for n in 1..n_max {
        let nf = n as f64;
        psi[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

/// Quadrature distribution `P_θ(x) = Σ ρ_mn e^(i(n-m)θ) ψ_m(x) ψ_n(x)`.
pub fn marginal(rho: &DensityMatrix, theta: f64, xs: &[f64]) -> Vec<f64> {
    let d = rho.nrows();
    let phase: Vec<C64> = (0..d).map(|n| C64::from_polar(1.0, n as f64 * theta)).collect();
    xs.iter()
        .map(|&x| {
            let psi = hermite_functions(x, d - 1);
            let amp: Vec<C64> = (0..d).map(|n| phase[n] * psi[n]).collect();
            let mut s = 0.0;
            for m in 0..d {
                for n in 0..d {
                    s += (rho[(m, n)] * amp[m].conj() * amp[n]).re;
                }
            }
            s
        })
        .collect()
}
