//! Temporal mode functions on a uniform time grid.
//!
//! A [`ModeFunction`] is a complex envelope `f(tᵢ)` sampled on a
//! [`TimeGrid`] in the rotating frame (carrier at `ω = 0`). Norms and
//! overlaps are Riemann sums `Σ a*(tᵢ) b(tᵢ) dt`. The spectral twin uses the
//! discrete analogue of `f̃(ω) = (2π)^(-1/2) ∫ f(t) e^(-iωt) dt` on the grid
//! `ω_k = k dω`, `dω = 2π/(N dt)`, which makes the transform exactly unitary.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Uniform sampling grid `t_i = t0 + i dt`, `i = 0..n_samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_samples: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidGrid(format!("t0 must be finite, got {t0}")));
        }
        if n_samples < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n_samples}")));
        }
        Ok(Self { t0, dt, n_samples })
    }

    /// Grid starting at `t = -origin_index·dt`, so that `t = 0` is a sample.
    pub fn with_origin(dt: f64, n_samples: usize, origin_index: usize) -> Result<Self> {
        Self::new(-(origin_index as f64) * dt, dt, n_samples)
    }

    /// 0.25 ns spacing, 1024 samples, `t = 0` at sample 256 (span −64 ns to 192 ns).
    pub fn standard() -> Self {
        Self {
            t0: -256.0 * 0.25e-9,
            dt: 0.25e-9,
            n_samples: 1024,
        }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.time(i)).collect()
    }

    /// First time past the last sample, `t0 + N dt`.
    pub fn end(&self) -> f64 {
        self.time(self.n_samples)
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the sample at `t = 0`, which must lie on the grid.
    pub fn origin_index(&self) -> Result<usize> {
        let k = -self.t0 / self.dt;
        let r = k.round();
        if (k - r).abs() > 1e-6 || r < 0.0 || r >= self.n_samples as f64 {
            return Err(Error::NoOriginSample {
                t0: self.t0,
                dt: self.dt,
            });
        }
        Ok(r as usize)
    }

    /// Number of samples in a duration, if it is a whole number of steps.
    pub fn steps_in(&self, duration: f64) -> Option<usize> {
        let k = duration / self.dt;
        let r = k.round();
        ((k - r).abs() <= 1e-6 * k.abs().max(1.0) && r >= 0.0).then_some(r as usize)
    }

    pub fn omega_step(&self) -> f64 {
        2.0 * PI / (self.n_samples as f64 * self.dt)
    }

    /// Angular frequency of spectral bin `k` in FFT order (negative
    /// frequencies in the upper half).
    pub fn omega(&self, k: usize) -> f64 {
        let n = self.n_samples;
        let signed = if k < n.div_ceil(2) {
            k as f64
        } else {
            k as f64 - n as f64
        };
        signed * self.omega_step()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.omega(k)).collect()
    }

    /// Bin holding `-ω_k`.
    pub fn negated_bin(&self, k: usize) -> usize {
        (self.n_samples - k) % self.n_samples
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n_samples == other.n_samples
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
    }

    fn covers(&self, start: f64, end: f64) -> Result<()> {
        let tol = 1e-9 * self.dt;
        if self.t0 > start + tol || self.time(self.n_samples - 1) < end - tol {
            return Err(Error::GridSpan {
                start,
                end,
                grid_start: self.t0,
                grid_end: self.end(),
            });
        }
        Ok(())
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Complex temporal waveform sampled on a [`TimeGrid`] (units s^(-1/2)).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub grid: TimeGrid,
    pub values: Vec<C64>,
    pub label: String,
}

/// Spectrum on the twin grid of a [`TimeGrid`], bins in FFT order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: TimeGrid,
    pub values: Vec<C64>,
}

impl Spectrum {
    pub fn omegas(&self) -> Vec<f64> {
        self.grid.omegas()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.omega_step()
    }

    /// `(ω, value)` pairs sorted by ascending frequency.
    pub fn sorted(&self) -> Vec<(f64, C64)> {
        let mut v: Vec<(f64, C64)> = (0..self.values.len())
            .map(|k| (self.grid.omega(k), self.values[k]))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

impl ModeFunction {
    pub fn new(grid: TimeGrid, values: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n_samples {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.n_samples
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("mode function has non-finite samples".into()));
        }
        Ok(Self {
            grid,
            values,
            label: label.into(),
        })
    }

    pub fn from_fn(grid: TimeGrid, label: impl Into<String>, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n_samples).map(|i| f(grid.time(i))).collect();
        Self {
            grid,
            values,
            label: label.into(),
        }
    }

    pub fn zeros(grid: TimeGrid, label: impl Into<String>) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.n_samples],
            label: label.into(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm("mode function"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|z| z * c).collect(),
            label: self.label.clone(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|z| z.conj()).collect(),
            label: format!("{}*", self.label),
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values.iter().all(|z| z.im.abs() <= tol)
    }

    /// Copy delayed by `steps` samples (positive = later); samples pushed
    /// off the grid are dropped.
    pub fn shifted(&self, steps: isize) -> Self {
        let n = self.values.len() as isize;
        let mut values = vec![C64::new(0.0, 0.0); n as usize];
        for (i, v) in values.iter_mut().enumerate() {
            let src = i as isize - steps;
            if (0..n).contains(&src) {
                *v = self.values[src as usize];
            }
        }
        Self {
            grid: self.grid,
            values,
            label: format!("{} shifted {steps}", self.label),
        }
    }

    /// Indices of the first and last sample with `|f| > rel_tol · max|f|`.
    pub fn support(&self, rel_tol: f64) -> Option<(usize, usize)> {
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return None;
        }
        let thr = rel_tol * peak;
        let first = self.values.iter().position(|z| z.norm() > thr)?;
        let last = self.values.iter().rposition(|z| z.norm() > thr)?;
        Some((first, last))
    }

    /// Riemann sum `Σ f(tᵢ) dt`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.dt
    }

    /// Discrete spectrum `f̃(ω_k)` on the twin grid.
    pub fn spectrum(&self) -> Spectrum {
        let g = self.grid;
        let n = g.n_samples;
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let pref = g.dt / (2.0 * PI).sqrt();
        let values = buf
            .into_iter()
            .enumerate()
            .map(|(k, z)| z * C64::from_polar(pref, -g.omega(k) * g.t0))
            .collect();
        Spectrum { grid: g, values }
    }

    /// Inverse of [`ModeFunction::spectrum`].
    pub fn from_spectrum(spec: &Spectrum, label: impl Into<String>) -> Self {
        let g = spec.grid;
        let n = g.n_samples;
        let mut buf: Vec<C64> = spec
            .values
            .iter()
            .enumerate()
            .map(|(k, z)| z * C64::from_polar(1.0, g.omega(k) * g.t0))
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let pref = g.omega_step() / (2.0 * PI).sqrt();
        Self {
            grid: g,
            values: buf.into_iter().map(|z| z * pref).collect(),
            label: label.into(),
        }
    }

    /// `f̃(ω)` at an arbitrary angular frequency, by direct summation.
    pub fn spectrum_at(&self, omega: f64) -> C64 {
        let g = self.grid;
        let sum: C64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z * C64::from_polar(1.0, -omega * g.time(i)))
            .sum();
        sum * (g.dt / (2.0 * PI).sqrt())
    }
}

/// Decay rate and bin duration of the time-bin waveforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformParams {
    /// Γ in rad/s.
    pub gamma: f64,
    /// Δt in s.
    pub delta_t: f64,
}

impl WaveformParams {
    pub fn new(gamma: f64, delta_t: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be positive, got {gamma}"
            )));
        }
        if !(delta_t > 0.0) || !delta_t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bin duration must be positive, got {delta_t}"
            )));
        }
        Ok(Self { gamma, delta_t })
    }

    /// Γ = 2π × 8.2 MHz, Δt = 20 ns.
    pub fn experiment() -> Self {
        Self {
            gamma: 2.0 * PI * 8.2e6,
            delta_t: 20e-9,
        }
    }
}

const MIN_SAMPLES_PER_BIN: usize = 16;

fn check_bin_resolution(params: &WaveformParams, grid: &TimeGrid) -> Result<()> {
    let per_bin = params.delta_t / grid.dt;
    if per_bin < MIN_SAMPLES_PER_BIN as f64 {
        return Err(Error::CoarseGrid {
            what: "bin",
            samples: per_bin,
            required: MIN_SAMPLES_PER_BIN,
        });
    }
    Ok(())
}

/// Half-open bin test `[start, end)` with a tolerance well below one step.
fn in_bin(t: f64, start: f64, end: f64, dt: f64) -> bool {
    let eps = 1e-6 * dt;
    t >= start - eps && t < end - eps
}

/// Time-bin waveform: `∝ exp(Γt)` on `[0, Δt)`, zero elsewhere, unit norm
/// on the grid.
pub fn make_time_bin(params: &WaveformParams, grid: &TimeGrid) -> Result<ModeFunction> {
    check_bin_resolution(params, grid)?;
    grid.covers(-params.delta_t, 2.0 * params.delta_t)?;
    let WaveformParams { gamma, delta_t } = *params;
    let f = ModeFunction::from_fn(*grid, "time_bin", |t| {
        if in_bin(t, 0.0, delta_t, grid.dt) {
            // exp(Γ(t - Δt)) keeps values ≤ 1 for any Γ·Δt
            C64::new((gamma * (t - delta_t)).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    f.normalized()
}

/// Balanced time-bin waveform: `+exp(Γt)` on `[0, Δt)`, `-exp(Γ(t-Δt))` on
/// `[Δt, 2Δt)`, unit norm on the grid.
pub fn make_balanced_time_bin(params: &WaveformParams, grid: &TimeGrid) -> Result<ModeFunction> {
    check_bin_resolution(params, grid)?;
    grid.covers(-params.delta_t, 3.0 * params.delta_t)?;
    let WaveformParams { gamma, delta_t } = *params;
    let dt = grid.dt;
    let first = |t: f64| {
        if in_bin(t, 0.0, delta_t, dt) {
            (gamma * (t - delta_t)).exp()
        } else {
            0.0
        }
    };
    let mut values: Vec<C64> = (0..grid.n_samples)
        .map(|i| C64::new(first(grid.time(i)), 0.0))
        .collect();
    match grid.steps_in(delta_t) {
        // Copy the first bin sample-for-sample so the two lobes cancel exactly.
        Some(shift) => {
            for i in (shift..grid.n_samples).rev() {
                let v = values[i - shift];
                if v.re != 0.0 {
                    values[i] = -v;
                }
            }
        }
        None => {
            for (i, v) in values.iter_mut().enumerate() {
                let t = grid.time(i);
                if in_bin(t, delta_t, 2.0 * delta_t, dt) {
                    *v = C64::new(-(gamma * (t - 2.0 * delta_t)).exp(), 0.0);
                }
            }
        }
    }
    ModeFunction::new(*grid, values, "balanced_time_bin")?.normalized()
}

/// `⟨a, b⟩ = Σ a*(tᵢ) b(tᵢ) dt`.
pub fn inner_product(a: &ModeFunction, b: &ModeFunction) -> Result<C64> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(raw_inner(&a.values, &b.values) * a.grid.dt)
}

fn raw_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `|⟨a, b⟩|²` for normalized inputs (inputs are normalized internally).
pub fn mode_match(a: &ModeFunction, b: &ModeFunction) -> Result<f64> {
    let ab = inner_product(a, b)?;
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm("mode function"));
    }
    Ok((ab.norm_sqr() / (na * nb)).min(1.0))
}

/// Orthonormal system of `k` modes whose first element is `f` (normalized).
///
/// Candidates are, in order: `f`, copies of `f` modulated by
/// `cos/sin(mπ(t - t_s)/W)` over its support of width `W`, copies shifted
/// by multiples of `W`, and finally unit samples. Each candidate goes
/// through modified Gram–Schmidt twice and is kept if a relative residual
/// above `1e-3` survives.
pub fn complete_basis(f: &ModeFunction, k: usize) -> Result<Vec<ModeFunction>> {
    let n = f.grid.n_samples;
    if k > n {
        return Err(Error::BasisTooLarge {
            requested: k,
            available: n,
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let f = f.normalized()?;
    let sqrt_dt = f.grid.dt.sqrt();
    // Work with unit vectors u = √dt·f so that the Euclidean product is ⟨·,·⟩.
    let mut basis: Vec<Vec<C64>> = vec![f.values.iter().map(|z| z * sqrt_dt).collect()];

    let (s0, s1) = f.support(1e-12).ok_or(Error::ZeroNorm("mode function"))?;
    let width = (s1 - s0 + 1) as f64;
    let mut candidates = CandidateSeeds {
        base: &f.values,
        s0,
        width,
        n,
        m: 1,
        shift: 1,
        stage: 0,
        unit: 0,
    };

    while basis.len() < k {
        let Some(mut v) = candidates.next() else { break };
        let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = raw_inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let res = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if res > 1e-3 * norm0 {
            v.iter_mut().for_each(|z| *z /= res);
            basis.push(v);
        }
    }
    if basis.len() < k {
        return Err(Error::BasisTooLarge {
            requested: k,
            available: basis.len(),
        });
    }
    Ok(basis
        .into_iter()
        .enumerate()
        .map(|(l, u)| {
            if l == 0 {
                return f.clone();
            }
            ModeFunction {
                grid: f.grid,
                values: u.into_iter().map(|z| z / sqrt_dt).collect(),
                label: format!("{}_perp{l}", f.label),
            }
        })
        .collect())
}

struct CandidateSeeds<'a> {
    base: &'a [C64],
    s0: usize,
    width: f64,
    n: usize,
    m: usize,
    shift: usize,
    stage: u8,
    unit: usize,
}

impl Iterator for CandidateSeeds<'_> {
    type Item = Vec<C64>;

    fn next(&mut self) -> Option<Vec<C64>> {
        loop {
            match self.stage {
                // modulated copies, cos then sin, up to the support resolution
                0 | 1 => {
                    if self.m as f64 > self.width {
                        self.stage = 2;
                        continue;
                    }
                    let m = self.m as f64;
                    let use_sin = self.stage == 1;
                    let v = self
                        .base
                        .iter()
                        .enumerate()
                        .map(|(i, z)| {
                            let phase = m * PI * (i as f64 - self.s0 as f64 + 0.5) / self.width;
                            z * if use_sin { phase.sin() } else { phase.cos() }
                        })
                        .collect();
                    if use_sin {
                        self.stage = 0;
                        self.m += 1;
                    } else {
                        self.stage = 1;
                    }
                    return Some(v);
                }
                // shifted copies, alternating later / earlier
                2 | 3 => {
                    let step = self.shift * self.width as usize;
                    if step >= self.n {
                        self.stage = 4;
                        continue;
                    }
                    let later = self.stage == 2;
                    let mut v = vec![C64::new(0.0, 0.0); self.n];
                    for (i, z) in self.base.iter().enumerate() {
                        let j = if later {
                            i.checked_add(step)
                        } else {
                            i.checked_sub(step)
                        };
                        if let Some(j) = j.filter(|&j| j < self.n) {
                            v[j] = *z;
                        }
                    }
                    if later {
                        self.stage = 3;
                    } else {
                        self.stage = 2;
                        self.shift += 1;
                    }
                    return Some(v);
                }
                _ => {
                    if self.unit >= self.n {
                        return None;
                    }
                    let mut v = vec![C64::new(0.0, 0.0); self.n];
                    v[self.unit] = C64::new(1.0, 0.0);
                    self.unit += 1;
                    return Some(v);
                }
            }
        }
    }
}

/// Gram matrix `G_kl = ⟨b_k, b_l⟩`.
pub fn gram_matrix(basis: &[ModeFunction]) -> Result<Vec<Vec<C64>>> {
    basis
        .iter()
        .map(|a| basis.iter().map(|b| inner_product(a, b)).collect())
        .collect()
}
