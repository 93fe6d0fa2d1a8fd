//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics.

#![allow(dead_code)]

pub mod dense;

use nalgebra::{DMatrix, DVector};
use qawg::C64;
use statrs::function::erf::erf;
use std::f64::consts::PI;

/// Odd or even cat `|α⟩ ± |−α⟩` (real α) from its Fock expansion.
pub fn cat(alpha: f64, odd: bool, dim: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    let mut c = (-alpha * alpha / 2.0).exp();
    for n in 0..dim {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        if (n % 2 == 1) == odd {
            v[n] = C64::new(c, 0.0);
        }
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

pub fn overlap(rho: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    let d = rho.nrows().min(v.len());
    let mut s = C64::new(0.0, 0.0);
    for m in 0..d {
        for n in 0..d {
            s += v[m].conj() * rho[(m, n)] * v[n];
        }
    }
    s.re
}

/// `max_α ⟨cat_α|ρ|cat_α⟩` by a 1e-4 scan and a parabolic refinement.
pub fn best_cat_scan(rho: &DMatrix<C64>, odd: bool) -> (f64, f64) {
    let f = |a: f64| overlap(rho, &cat(a, odd, 40));
    let mut best = (1e-3, f(1e-3));
    let mut a = 1e-3;
    while a <= 2.5 {
        let v = f(a);
        if v > best.1 {
            best = (a, v);
        }
        a += 1e-4;
    }
    best
}

/// `W(0,0) = Σ (−1)^n ρ_nn / π`.
pub fn wigner_origin(rho: &DMatrix<C64>) -> f64 {
    (0..rho.nrows())
        .map(|n| if n % 2 == 0 { rho[(n, n)].re } else { -rho[(n, n)].re })
        .sum::<f64>()
        / PI
}

pub fn normal_cdf(x: f64, mean: f64, var: f64) -> f64 {
    0.5 * (1.0 + erf((x - mean) / (2.0 * var).sqrt()))
}

pub fn vacuum_cdf(x: f64) -> f64 {
    normal_cdf(x, 0.0, 0.5)
}

/// `|ψ₁(x)|² = 2x² e^(−x²)/√π` integrated.
pub fn fock1_cdf(x: f64) -> f64 {
    vacuum_cdf(x) - x * (-x * x).exp() / PI.sqrt()
}

/// x-quadrature of the odd cat with real α.
pub fn odd_cat_x_cdf(x: f64, alpha: f64) -> f64 {
    let c = 2f64.sqrt() * alpha;
    let e = (-2.0 * alpha * alpha).exp();
    (0.5 * (1.0 + erf(x - c)) + 0.5 * (1.0 + erf(x + c)) - e * (1.0 + erf(x))) / (2.0 * (1.0 - e))
}

/// p-quadrature of the odd cat with real α: density `∝ sin²(√2αp) e^(−p²)`,
/// tabulated by composite Simpson on `[−10, 10]`.
pub fn odd_cat_p_cdf(alpha: f64) -> impl Fn(f64) -> f64 {
    let c = 2f64.sqrt() * alpha;
    let n = 200_000;
    let (lo, hi) = (-10.0, 10.0);
    let h = (hi - lo) / n as f64;
    let dens = |p: f64| (c * p).sin().powi(2) * (-p * p).exp();
    let mut cdf = vec![0.0; n / 2 + 1];
    for k in 1..=n / 2 {
        let a = lo + (2 * k - 2) as f64 * h;
        cdf[k] = cdf[k - 1] + h / 3.0 * (dens(a) + 4.0 * dens(a + h) + dens(a + 2.0 * h));
    }
    let total = cdf[n / 2];
    move |p: f64| {
        if p <= lo {
            return 0.0;
        }
        if p >= hi {
            return 1.0;
        }
        let s = (p - lo) / (2.0 * h);
        let k = s.floor() as usize;
        let w = s - k as f64;
        ((1.0 - w) * cdf[k] + w * cdf[(k + 1).min(n / 2)]) / total
    }
}

/// Two-sided KS statistic.
pub fn ks(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `√(−ln(a/2)/2)/√n`.
pub fn ks_critical(n: usize, significance: f64) -> f64 {
    (-(significance / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn report(n: usize, name: &str, ok: bool, detail: &str) {
    println!("criterion {n} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}
