//! Finite-mode Gaussian states over wave-packet modes spread across optical
//! channels.
//!
//! Quadratures are ordered `(x₀, p₀, x₁, p₁, …)` with one pair per mode
//! slot, vacuum covariance `I/2`. Every operation is a symplectic map `S`
//! applied as `V → S V Sᵀ`, `d → S d`, or the loss channel.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::modes::{ModeFunction, TimeGrid};
use crate::{Error, Result, C64, CONVENTION};

/// One mode slot: the channel it lives on and its temporal mode function.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSlot {
    pub channel: usize,
    pub mode: ModeFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_channels: usize,
    slots: Vec<ModeSlot>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Squeezing parameter spectrum r̃(ω), even in ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum SqueezingSpectrum {
    /// δ-correlated pair creation: r̃(ω) = r over the whole grid.
    Flat {
        r: f64,
    },
    Lorentzian {
        r: f64,
        hwhm: f64,
    },
    Gaussian {
        r: f64,
        sigma: f64,
    },
}

impl SqueezingSpectrum {
    pub fn at(&self, omega: f64) -> f64 {
        match *self {
            Self::Flat { r } => r,
            Self::Lorentzian { r, hwhm } => r * hwhm * hwhm / (hwhm * hwhm + omega * omega),
            Self::Gaussian { r, sigma } => r * (-omega * omega / (2.0 * sigma * sigma)).exp(),
        }
    }

    pub fn on_grid(&self, grid: &TimeGrid) -> Vec<f64> {
        grid.omegas().into_iter().map(|w| self.at(w)).collect()
    }

    /// `max |r̃(ω_k) - r̃(-ω_k)|` over the twin grid.
    pub fn symmetry_error(&self, grid: &TimeGrid) -> f64 {
        let r = self.on_grid(grid);
        (0..r.len())
            .map(|k| (r[k] - r[grid.negated_bin(k)]).abs())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let (r, width) = match *self {
            Self::Flat { r } => (r, 1.0),
            Self::Lorentzian { r, hwhm } => (r, hwhm),
            Self::Gaussian { r, sigma } => (r, sigma),
        };
        if !r.is_finite() || !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid squeezing spectrum {self:?}")));
        }
        Ok(())
    }
}

/// Frequency-independent two-channel mixer `e^(iνL/2) e^(κM/2) e^(iμL/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    pub kappa: f64,
    pub nu: f64,
    pub mu: f64,
}

impl BeamSplitterSpec {
    pub fn new(kappa: f64, nu: f64, mu: f64) -> Self {
        Self { kappa, nu, mu }
    }

    /// Tap sending a fraction `reflectance` of channel 1 into channel 2.
    pub fn tap(reflectance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectance) {
            return Err(Error::InvalidParameter(format!(
                "tap reflectance {reflectance} outside [0, 1]"
            )));
        }
        Ok(Self::new(2.0 * (1.0 - reflectance).sqrt().acos(), 0.0, 0.0))
    }

    pub fn balanced() -> Self {
        Self::new(PI / 2.0, 0.0, 0.0)
    }

    pub fn transmittance(&self) -> f64 {
        (self.kappa / 2.0).cos().powi(2)
    }

    /// Heisenberg-picture mixing `(a, b) → U (a, b)`.
    pub fn unitary(&self) -> [[C64; 2]; 2] {
        let phase = |phi: f64| {
            [
                [C64::from_polar(1.0, phi), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::from_polar(1.0, -phi)],
            ]
        };
        let (s, c) = (self.kappa / 2.0).sin_cos();
        let rot = [
            [C64::new(c, 0.0), C64::new(s, 0.0)],
            [C64::new(-s, 0.0), C64::new(c, 0.0)],
        ];
        mat2_mul(&mat2_mul(&phase(self.nu / 2.0), &rot), &phase(self.mu / 2.0))
    }
}

fn mat2_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Real symplectic matrix (xxpp order over `n` modes) of the linear map
/// `a' = A a + B a†`.
fn bogoliubov_to_real(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let sum = a[(i, j)] + b[(i, j)];
            let diff = a[(i, j)] - b[(i, j)];
            s[(i, j)] = sum.re;
            s[(i, n + j)] = -diff.im;
            s[(n + i, j)] = sum.im;
            s[(n + i, n + j)] = diff.re;
        }
    }
    s
}

/// Symplectic matrix (xxpp order) of `exp(½(a†ᵀ Z a† - aᵀ Z* a))` for a
/// complex symmetric `Z`.
pub fn squeezer_symplectic(z: &DMatrix<C64>) -> DMatrix<f64> {
    let n = z.nrows();
    let k = bogoliubov_to_real(&DMatrix::zeros(n, n), z);
    k.exp()
}

/// Symplectic form in xpxp order.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for s in 0..n_modes {
        o[(2 * s, 2 * s + 1)] = 1.0;
        o[(2 * s + 1, 2 * s)] = -1.0;
    }
    o
}

impl GaussianState {
    /// Vacuum over the given `(channel, mode)` slots.
    pub fn vacuum(n_channels: usize, slots: Vec<ModeSlot>) -> Result<Self> {
        if let Some(s) = slots.iter().find(|s| s.channel >= n_channels) {
            return Err(Error::UnknownChannel(s.channel));
        }
        let n = slots.len();
        Ok(Self {
            n_channels,
            slots,
            mean: DVector::zeros(2 * n),
            cov: DMatrix::identity(2 * n, 2 * n) * 0.5,
        })
    }

    /// Vacuum with one basis per channel; slots are ordered channel-major.
    pub fn vacuum_with_bases(bases: Vec<Vec<ModeFunction>>) -> Result<Self> {
        let n_channels = bases.len();
        let slots = bases
            .into_iter()
            .enumerate()
            .flat_map(|(channel, b)| b.into_iter().map(move |mode| ModeSlot { channel, mode }))
            .collect();
        Self::vacuum(n_channels, slots)
    }

    /// Vacuum of `modes_per_channel[c]` abstract modes per channel, realized
    /// as orthonormal unit spikes on a unit-step grid.
    pub fn vacuum_abstract(modes_per_channel: &[usize]) -> Result<Self> {
        let bases = modes_per_channel
            .iter()
            .map(|&m| -> Result<Vec<ModeFunction>> {
                let grid = TimeGrid::new(0.0, 1.0, m.max(2))?;
                Ok((0..m)
                    .map(|l| {
                        let mut f = ModeFunction::zeros(grid, format!("m{l}"));
                        f.values[l] = C64::new(1.0, 0.0);
                        f
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::vacuum_with_bases(bases)
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_modes(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[ModeSlot] {
        &self.slots
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Slot indices of a channel, in registration order.
    pub fn channel_slots(&self, channel: usize) -> Result<Vec<usize>> {
        if channel >= self.n_channels {
            return Err(Error::UnknownChannel(channel));
        }
        Ok((0..self.slots.len())
            .filter(|&s| self.slots[s].channel == channel)
            .collect())
    }

    /// Slot index of the `mode`-th mode on `channel`.
    pub fn slot(&self, channel: usize, mode: usize) -> Result<usize> {
        self.channel_slots(channel)?
            .get(mode)
            .copied()
            .ok_or(Error::UnknownMode { channel, mode })
    }

    /// Apply a symplectic `s` (xxpp order over `slots`) to those slots.
    pub fn apply_symplectic(&self, slots: &[usize], s: &DMatrix<f64>) -> Result<Self> {
        let n = slots.len();
        if s.shape() != (2 * n, 2 * n) {
            return Err(Error::InvalidParameter(format!(
                "symplectic matrix shape {:?} does not fit {n} modes",
                s.shape()
            )));
        }
        let dim = 2 * self.slots.len();
        let idx: Vec<usize> = (0..2 * n)
            .map(|i| if i < n { 2 * slots[i] } else { 2 * slots[i - n] + 1 })
            .collect();
        let mut full = DMatrix::identity(dim, dim);
        for &i in &idx {
            full[(i, i)] = 0.0;
        }
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                full[(i, j)] = s[(a, b)];
            }
        }
        let mut out = self.clone();
        out.mean = &full * &self.mean;
        out.cov = &full * &self.cov * full.transpose();
        out.symmetrize();
        Ok(out)
    }

    fn symmetrize(&mut self) {
        self.cov = (&self.cov + self.cov.transpose()) * 0.5;
    }

    /// Squeeze one mode; `r > 0` squeezes x.
    pub fn squeeze_mode(&self, channel: usize, mode: usize, r: f64) -> Result<Self> {
        let s = self.slot(channel, mode)?;
        if !r.is_finite() {
            return Err(Error::InvalidParameter(format!("squeezing {r} is not finite")));
        }
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = (-r).exp();
        m[(1, 1)] = r.exp();
        self.apply_symplectic(&[s], &m)
    }

    /// Two-mode squeezing `exp(r(a†b† - ab))` between two channels; `var(x₁ - x₂) = e^(-2r)`.
    pub fn epr_pair(&self, ch1: usize, mode1: usize, ch2: usize, mode2: usize, r: f64) -> Result<Self> {
        if ch1 == ch2 {
            return Err(Error::SameChannel(ch1));
        }
        let s1 = self.slot(ch1, mode1)?;
        let s2 = self.slot(ch2, mode2)?;
        let mut z = DMatrix::zeros(2, 2);
        z[(0, 1)] = C64::new(r, 0.0);
        z[(1, 0)] = C64::new(r, 0.0);
        self.apply_symplectic(&[s1, s2], &squeezer_symplectic(&z))
    }

    /// Apply the same two-channel mixing to every mode index shared by the
    /// two channels.
    pub fn beam_split(&self, spec: &BeamSplitterSpec, ch1: usize, ch2: usize) -> Result<Self> {
        if ch1 == ch2 {
            return Err(Error::SameChannel(ch1));
        }
        let a = self.channel_slots(ch1)?;
        let b = self.channel_slots(ch2)?;
        if a.len() != b.len() {
            return Err(Error::BasisMismatch(ch1, ch2));
        }
        for (&i, &j) in a.iter().zip(&b) {
            if !same_mode(&self.slots[i].mode, &self.slots[j].mode) {
                return Err(Error::BasisMismatch(ch1, ch2));
            }
        }
        let u = spec.unitary();
        let mut um = DMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                um[(i, j)] = u[i][j];
            }
        }
        let s = bogoliubov_to_real(&um, &DMatrix::zeros(2, 2));
        let mut out = self.clone();
        for (&i, &j) in a.iter().zip(&b) {
            out = out.apply_symplectic(&[i, j], &s)?;
        }
        Ok(out)
    }

    /// Shift the mode amplitude by `alpha`.
    pub fn displace(&self, channel: usize, mode: usize, alpha: C64) -> Result<Self> {
        let s = self.slot(channel, mode)?;
        let mut out = self.clone();
        out.mean[2 * s] += 2f64.sqrt() * alpha.re;
        out.mean[2 * s + 1] += 2f64.sqrt() * alpha.im;
        Ok(out)
    }

    /// Monochromatic displacement at `omega_d`: mode `l` receives
    /// `f̃_l*(ω_d) α`.
    pub fn displace_monochromatic(&self, channel: usize, alpha: C64, omega_d: f64) -> Result<Self> {
        let mut out = self.clone();
        for (m, s) in self.channel_slots(channel)?.into_iter().enumerate() {
            let amp = self.slots[s].mode.spectrum_at(omega_d).conj() * alpha;
            out = out.displace(channel, m, amp)?;
        }
        Ok(out)
    }

    /// Pure loss with transmission `eta` on one mode.
    pub fn loss(&self, channel: usize, mode: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("transmission {eta} outside [0, 1]")));
        }
        let s = self.slot(channel, mode)?;
        let mut out = self.clone();
        let k = eta.sqrt();
        let dim = 2 * self.slots.len();
        for i in [2 * s, 2 * s + 1] {
            out.mean[i] *= k;
            for j in 0..dim {
                out.cov[(i, j)] *= k;
                out.cov[(j, i)] *= k;
            }
            out.cov[(i, i)] += 0.5 * (1.0 - eta);
        }
        Ok(out)
    }

    /// Pure loss on every mode of a channel.
    pub fn loss_channel(&self, channel: usize, eta: f64) -> Result<Self> {
        let n = self.channel_slots(channel)?.len();
        (0..n).try_fold(self.clone(), |st, m| st.loss(channel, m, eta))
    }

    /// CW squeezing `exp(½(P† - P))` with pair spectrum `r̃`, projected onto
    /// the channel's basis. The sign is chosen so that a flat `r̃ = r > 0`
    /// squeezes x of every real mode.
    pub fn squeeze_broadband(&self, channel: usize, spec: &SqueezingSpectrum) -> Result<Self> {
        spec.validate()?;
        let slots = self.channel_slots(channel)?;
        let spectra = self.spectra(&slots)?;
        let grid = self.slots[slots[0]].mode.grid;
        let r = spec.on_grid(&grid);
        let dw = grid.omega_step();
        let n = slots.len();
        let mut z = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (w, rw) in r.iter().enumerate() {
                    let wn = grid.negated_bin(w);
                    acc += spectra[k][w].conj() * spectra[l][wn].conj() * *rw;
                }
                z[(k, l)] = -acc * dw;
            }
        }
        let z = (&z + z.transpose()) * C64::new(0.5, 0.0);
        self.apply_symplectic(&slots, &squeezer_symplectic(&z))
    }

    /// CW two-mode squeezing `exp(Q† - Q)` between two channels, projected
    /// onto both bases. With channel 2 carrying the conjugate basis and flat
    /// `r̃`, mode `l` of channel 1 pairs with mode `l` of channel 2.
    pub fn epr_broadband(&self, ch1: usize, ch2: usize, spec: &SqueezingSpectrum) -> Result<Self> {
        if ch1 == ch2 {
            return Err(Error::SameChannel(ch1));
        }
        spec.validate()?;
        let a = self.channel_slots(ch1)?;
        let b = self.channel_slots(ch2)?;
        let sa = self.spectra(&a)?;
        let sb = self.spectra(&b)?;
        let grid = self.slots[a[0]].mode.grid;
        if !grid.same_as(&self.slots[b[0]].mode.grid) {
            return Err(Error::GridMismatch);
        }
        let r = spec.on_grid(&grid);
        let dw = grid.omega_step();
        let (na, nb) = (a.len(), b.len());
        let mut z = DMatrix::zeros(na + nb, na + nb);
        for k in 0..na {
            for l in 0..nb {
                let mut acc = C64::new(0.0, 0.0);
                for (w, rw) in r.iter().enumerate() {
                    acc += sa[k][w].conj() * sb[l][grid.negated_bin(w)].conj() * *rw;
                }
                z[(k, na + l)] = acc * dw;
                z[(na + l, k)] = acc * dw;
            }
        }
        let slots: Vec<usize> = a.iter().chain(&b).copied().collect();
        self.apply_symplectic(&slots, &squeezer_symplectic(&z))
    }

    fn spectra(&self, slots: &[usize]) -> Result<Vec<Vec<C64>>> {
        let first = slots
            .first()
            .ok_or(Error::InvalidParameter("channel has no modes".into()))?;
        let grid = self.slots[*first].mode.grid;
        slots
            .iter()
            .map(|&s| {
                let f = &self.slots[s].mode;
                if !f.grid.same_as(&grid) {
                    return Err(Error::GridMismatch);
                }
                Ok(f.spectrum().values)
            })
            .collect()
    }

    /// Marginal state of the listed slots, in that order.
    pub fn reduce(&self, slots: &[usize]) -> Result<Self> {
        if let Some(&s) = slots.iter().find(|&&s| s >= self.slots.len()) {
            return Err(Error::InvalidParameter(format!("slot {s} out of range")));
        }
        let idx: Vec<usize> = slots.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cov[(idx[i], idx[j])]);
        Ok(Self {
            n_channels: self.n_channels,
            slots: slots.iter().map(|&s| self.slots[s].clone()).collect(),
            mean,
            cov,
        })
    }

    /// `det(2V)`: 1 for pure states, larger for mixed ones.
    pub fn symplectic_purity(&self) -> f64 {
        (&self.cov * 2.0).determinant()
    }

    /// Smallest eigenvalue of `V + (i/2)Ω`; non-negative for physical states.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let n = self.slots.len();
        let o = omega(n);
        let h = DMatrix::from_fn(2 * n, 2 * n, |i, j| C64::new(self.cov[(i, j)], 0.5 * o[(i, j)]));
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_photon_number(&self, slot: usize) -> f64 {
        let (x, p) = (2 * slot, 2 * slot + 1);
        0.5 * (self.cov[(x, x)] + self.cov[(p, p)] + self.mean[x].powi(2) + self.mean[p].powi(2) - 1.0)
    }

    pub fn total_photon_number(&self) -> f64 {
        (0..self.slots.len()).map(|s| self.mean_photon_number(s)).sum()
    }

    /// Largest `|V_ij|` in the 2×2 block coupling two slots.
    pub fn cross_covariance(&self, a: usize, b: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in [2 * a, 2 * a + 1] {
            for j in [2 * b, 2 * b + 1] {
                m = m.max(self.cov[(i, j)].abs());
            }
        }
        m
    }

    /// Largest coupling between `slot` and any other slot.
    pub fn max_coupling_to_others(&self, slot: usize, exclude: &[usize]) -> f64 {
        (0..self.slots.len())
            .filter(|s| *s != slot && !exclude.contains(s))
            .map(|s| self.cross_covariance(slot, s))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct ModeEntry<'a> {
            channel: usize,
            label: &'a str,
        }
        #[derive(Serialize)]
        struct Export<'a> {
            format: &'static str,
            convention: &'static str,
            ordering: &'static str,
            modes: Vec<ModeEntry<'a>>,
            mean: Vec<f64>,
            cov: Vec<Vec<f64>>,
        }
        let n = self.cov.nrows();
        let e = Export {
            format: "qawg.gaussian_state/1",
            convention: CONVENTION,
            ordering: "x0,p0,x1,p1,...",
            modes: self
                .slots
                .iter()
                .map(|s| ModeEntry {
                    channel: s.channel,
                    label: &s.mode.label,
                })
                .collect(),
            mean: self.mean.iter().cloned().collect(),
            cov: (0..n).map(|i| (0..n).map(|j| self.cov[(i, j)]).collect()).collect(),
        };
        Ok(serde_json::to_string_pretty(&e)?)
    }
}

fn same_mode(a: &ModeFunction, b: &ModeFunction) -> bool {
    if !a.grid.same_as(&b.grid) {
        return false;
    }
    let scale = a.values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    a.values
        .iter()
        .zip(&b.values)
        .all(|(x, y)| (x - y).norm() <= 1e-12 * scale)
}

fn purity_parts(f: &ModeFunction, spec: &SqueezingSpectrum) -> Result<(Vec<C64>, Vec<f64>, TimeGrid)> {
    spec.validate()?;
    let f = f.normalized()?;
    let grid = f.grid;
    Ok((f.spectrum().values, spec.on_grid(&grid), grid))
}

/// Overlap `M[f, r] = |⟨f, N(f* ∗ r)⟩|²`; 1 when CW squeezing factorizes
/// into mode `f` and its orthogonal complement.
pub fn purity_real(f: &ModeFunction, spec: &SqueezingSpectrum) -> Result<f64> {
    let (s, r, grid) = purity_parts(f, spec)?;
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for k in 0..s.len() {
        let kn = grid.negated_bin(k);
        num += s[k].conj() * s[kn].conj() * r[k];
        den += s[kn].norm_sqr() * r[k] * r[k];
    }
    if den <= 0.0 {
        return Err(Error::ZeroNorm("squeezing convolution"));
    }
    Ok((num.norm_sqr() * grid.omega_step() / den).min(1.0))
}

/// Overlap `M'[f, r] = |⟨f*, N(f* ∗ r)⟩|²` for the EPR construction in a
/// complex mode.
pub fn purity_complex(f: &ModeFunction, spec: &SqueezingSpectrum) -> Result<f64> {
    let (s, r, grid) = purity_parts(f, spec)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..s.len() {
        let a = s[grid.negated_bin(k)].norm_sqr();
        num += a * r[k];
        den += a * r[k] * r[k];
    }
    if den <= 0.0 {
        return Err(Error::ZeroNorm("squeezing convolution"));
    }
    Ok((num * num * grid.omega_step() / den).min(1.0))
}
