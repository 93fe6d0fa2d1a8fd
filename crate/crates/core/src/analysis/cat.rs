use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::linalg::DensityMatrix;
use crate::{Error, Result, C64};

/// Largest α scanned by [`best_cat`].
pub const ALPHA_SCAN_MAX: f64 = 2.5;
const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn keeps(self, n: usize) -> bool {
        match self {
            Self::Even => n % 2 == 0,
            Self::Odd => n % 2 == 1,
        }
    }
}

/// Mass of the normalized cat state above `cutoff`.
pub fn cat_tail(alpha: f64, parity: Parity, cutoff: usize) -> f64 {
    let a2 = alpha * alpha;
    if a2 < 1e-12 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut kept = 0.0;
    let mut all = 0.0f64;
    let mut n = 0usize;
    loop {
        if parity.keeps(n) {
            all += term;
            if n <= cutoff {
                kept += term;
            }
        }
        if n > cutoff && term < 1e-30 * all.max(1e-300) {
            break;
        }
        n += 1;
        term *= a2 / n as f64;
    }
    (1.0 - kept / all).max(0.0)
}

/// Largest α whose cat state fits below `cutoff` with tail < 1e-8.
pub fn alpha_limit(parity: Parity, cutoff: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cat_tail(mid, parity, cutoff) < TAIL_TOLERANCE {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Normalized `|α⟩ ± |-α⟩` in a space of dimension `dim`; the α → 0 limits
/// are `|0⟩` (even) and `|1⟩` (odd).
pub fn cat_vector(alpha: C64, parity: Parity, dim: usize) -> Result<DVector<C64>> {
    let needed = if parity == Parity::Odd { 2 } else { 1 };
    if dim < needed {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} too small for a cat state"
        )));
    }
    let tail = cat_tail(alpha.norm(), parity, dim - 1);
    if tail > TAIL_TOLERANCE {
        return Err(Error::TruncationTail {
            tail,
            tolerance: TAIL_TOLERANCE,
            cutoff: dim - 1,
        });
    }
    let mut v = DVector::zeros(dim);
    if alpha.norm() < 1e-8 {
        v[needed - 1] = C64::new(1.0, 0.0);
        return Ok(v);
    }
    let mut c = C64::new(1.0, 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        if parity.keeps(n) {
            v[n] = c;
        }
    }
    let norm = v.norm();
    Ok(v / C64::new(norm, 0.0))
}

/// `⟨cat(α)|ρ|cat(α)⟩`.
pub fn cat_fidelity(rho: &DensityMatrix, alpha: C64, parity: Parity) -> Result<f64> {
    let v = cat_vector(alpha, parity, rho.nrows())?;
    Ok((v.adjoint() * rho * &v)[(0, 0)].re)
}

/// Best real α ∈ [0, min(2.5, α_limit)] and its fidelity.
pub fn best_cat(rho: &DensityMatrix, parity: Parity) -> Result<(f64, f64)> {
    let hi = ALPHA_SCAN_MAX.min(alpha_limit(parity, rho.nrows() - 1));
    let f = |a: f64| cat_fidelity(rho, C64::new(a, 0.0), parity);
    let n = 200;
    let step = hi / n as f64;
    let mut best = (0.0, f(0.0)?);
    let mut best_i = 0usize;
    for i in 1..=n {
        let a = i as f64 * step;
        let v = f(a)?;
        if v > best.1 {
            best = (a, v);
            best_i = i;
        }
    }
    let mut lo = (best_i.saturating_sub(1)) as f64 * step;
    let mut up = ((best_i + 1).min(n)) as f64 * step;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = up - g * (up - lo);
    let mut d = lo + g * (up - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while up - lo > 1e-6 {
        if fc > fd {
            up = d;
            d = c;
            fd = fc;
            c = up - g * (up - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (up - lo);
            fd = f(d)?;
        }
    }
    let a = 0.5 * (lo + up);
    let fa = f(a)?;
    Ok(if fa >= best.1 { (a, fa) } else { best })
}
