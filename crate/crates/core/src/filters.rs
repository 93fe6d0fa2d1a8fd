//! Photon-detection-path filters: a cavity stage with an exponential
//! (IIR) response followed by a three-arm delay interferometer (FIR).
//!
//! Impulse responses live on the same [`TimeGrid`] as mode functions, with
//! `t = 0` on a grid sample. A δ-function is one sample of height `1/dt`, so
//! the discrete convolution reproduces `g * δ = g` exactly. The transfer
//! function is `g̃(ω) = Σ g(tᵢ) e^(-iωtᵢ) dt`, which for the cavity stage is
//! the Lorentzian `Γ/(Γ + iω)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::modes::{ModeFunction, TimeGrid, WaveformParams};
use crate::{Error, Result, C64};

/// Cavity stage. `hwhm` is the cavity half width Γ in rad/s;
/// `bandpass_hwhm` is the broad pre-filter that strips the other cavity
/// resonances, treated as ideal transmission on the standard grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IirStage {
    pub hwhm: f64,
    pub bandpass_hwhm: f64,
}

impl IirStage {
    pub fn new(hwhm: f64, bandpass_hwhm: f64) -> Result<Self> {
        if !(hwhm > 0.0) || !hwhm.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cavity HWHM must be positive, got {hwhm}"
            )));
        }
        if !(bandpass_hwhm >= 10.0 * hwhm) {
            return Err(Error::InvalidParameter(format!(
                "band-pass HWHM {bandpass_hwhm:e} rad/s must be at least 10x the cavity HWHM {hwhm:e} rad/s"
            )));
        }
        Ok(Self { hwhm, bandpass_hwhm })
    }

    /// Cavity HWHM 8.2 MHz behind a 130 GHz interference filter.
    pub fn experiment() -> Self {
        Self {
            hwhm: 2.0 * PI * 8.2e6,
            bandpass_hwhm: 2.0 * PI * 130e9,
        }
    }
}

/// Three-arm interferometer with delays `0, Δt, 2Δt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirStage {
    pub kappas: [f64; 3],
    pub thetas: [f64; 3],
    pub delay: f64,
}

impl FirStage {
    pub fn new(kappas: [f64; 3], thetas: [f64; 3], delay: f64) -> Result<Self> {
        if kappas.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "arm amplitudes must be non-negative, got {kappas:?}"
            )));
        }
        if kappas.iter().all(|k| *k == 0.0) {
            return Err(Error::InvalidParameter(
                "at least one arm amplitude must be positive".into(),
            ));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "arm phases must be finite, got {thetas:?}"
            )));
        }
        if !(delay > 0.0) || !delay.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "arm delay must be positive, got {delay}"
            )));
        }
        Ok(Self { kappas, thetas, delay })
    }

    /// Arms `1 : e^(-ΓΔt) : 0` with the middle arm phase π; cancels the
    /// cavity tail after one bin.
    pub fn time_bin(params: &WaveformParams) -> Self {
        let d = (-params.gamma * params.delta_t).exp();
        Self {
            kappas: [1.0, d, 0.0],
            thetas: [0.0, PI, 0.0],
            delay: params.delta_t,
        }
    }

    /// Arms `1 : 1 + e^(-ΓΔt) : e^(-ΓΔt)` with phases `(0, π, 0)`; yields two
    /// opposite-sign exponential bins of equal height and no tail.
    pub fn balanced_time_bin(params: &WaveformParams) -> Self {
        let d = (-params.gamma * params.delta_t).exp();
        Self {
            kappas: [1.0, 1.0 + d, d],
            thetas: [0.0, PI, 0.0],
            delay: params.delta_t,
        }
    }
}

/// Realized filter: `g(t)` on the grid, its transfer `g̃(ω)` on the twin
/// grid (FFT order), and the ancilla transfer `h̃(ω)` once the two-port has
/// been completed.
#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    pub g: ModeFunction,
    pub transmit_spectrum: Vec<C64>,
    pub ancilla_spectrum: Option<Vec<C64>>,
}

impl ImpulseResponse {
    pub fn from_samples(g: ModeFunction) -> Self {
        let transmit_spectrum = transfer_on_grid(&g);
        Self {
            g,
            transmit_spectrum,
            ancilla_spectrum: None,
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.g.grid
    }

    pub fn label(&self) -> &str {
        &self.g.label
    }

    /// `g̃(ω) = Σ g(tᵢ) e^(-iωtᵢ) dt` at an arbitrary frequency.
    pub fn transfer_at(&self, omega: f64) -> C64 {
        self.g.spectrum_at(omega) * (2.0 * PI).sqrt()
    }

    pub fn max_gain(&self) -> f64 {
        self.transmit_spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|g(t)|` over samples with `t < 0`.
    pub fn causality_violation(&self) -> f64 {
        let g = self.grid();
        (0..g.n_samples)
            .filter(|&i| g.time(i) < -1e-6 * g.dt)
            .map(|i| self.g.values[i].norm())
            .fold(0.0, f64::max)
    }

    /// `max_ω ||g̃|² + |h̃|² - 1|`, or `None` before two-port completion.
    pub fn passivity_error(&self) -> Option<f64> {
        let h = self.ancilla_spectrum.as_ref()?;
        Some(
            self.transmit_spectrum
                .iter()
                .zip(h)
                .map(|(g, h)| (g.norm_sqr() + h.norm_sqr() - 1.0).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Copy scaled so that `max_ω |g̃(ω)| = 1` (lossless at the peak).
    pub fn rescaled_passive(&self) -> Result<Self> {
        let m = self.max_gain();
        if m == 0.0 {
            return Err(Error::ZeroNorm("impulse response"));
        }
        Ok(Self::from_samples(self.g.scaled(C64::new(1.0 / m, 0.0))))
    }

    /// Unit impulse δ(t) realized as a single sample of height `1/dt`.
    pub fn unit_spike(grid: &TimeGrid) -> Result<Self> {
        let i0 = grid.origin_index()?;
        let mut g = ModeFunction::zeros(*grid, "delta");
        g.values[i0] = C64::new(1.0 / grid.dt, 0.0);
        Ok(Self::from_samples(g))
    }
}

fn transfer_on_grid(g: &ModeFunction) -> Vec<C64> {
    let s = (2.0 * PI).sqrt();
    g.spectrum().values.into_iter().map(|z| z * s).collect()
}

/// `g(t) = Γ e^(-Γt)` for `t ≥ 0`.
pub fn iir_response(stage: &IirStage, grid: &TimeGrid) -> Result<ImpulseResponse> {
    let per_decay = 1.0 / (stage.hwhm * grid.dt);
    if per_decay < 16.0 {
        return Err(Error::CoarseGrid {
            what: "decay time 1/Γ",
            samples: per_decay,
            required: 16,
        });
    }
    let i0 = grid.origin_index()?;
    let gamma = stage.hwhm;
    let mut g = ModeFunction::zeros(*grid, "iir");
    for i in i0..grid.n_samples {
        let t = (i - i0) as f64 * grid.dt;
        g.values[i] = C64::new(gamma * (-gamma * t).exp(), 0.0);
    }
    Ok(ImpulseResponse::from_samples(g))
}

/// Cavity response including its periodic resonances, for characterization
/// on fine grids. The Airy transfer `(1-ρ) e^(-iωτ/2) / (1 - ρ e^(-iωτ))`
/// (`τ = 2π/FSR`, ρ set so the half width is Γ) is multiplied by the
/// Lorentzian band-pass and transformed back to the time grid.
pub fn iir_response_wideband(stage: &IirStage, fsr_hz: f64, grid: &TimeGrid) -> Result<ImpulseResponse> {
    if !(fsr_hz > 0.0) {
        return Err(Error::InvalidParameter(format!("FSR must be positive, got {fsr_hz}")));
    }
    let tau = 1.0 / fsr_hz;
    let c = (stage.hwhm * tau).cos();
    let b = 4.0 - 2.0 * c;
    let rho = (b - (b * b - 4.0).sqrt()) / 2.0;
    let airy = |w: f64| {
        let num = C64::from_polar(1.0 - rho, -w * tau / 2.0);
        let den = C64::new(1.0, 0.0) - C64::from_polar(rho, -w * tau);
        let bp = stage.bandpass_hwhm / C64::new(stage.bandpass_hwhm, w);
        num / den * bp
    };
    let spec = crate::modes::Spectrum {
        grid: *grid,
        values: (0..grid.n_samples)
            .map(|k| {
                let w = grid.omega(k);
                // transfer = √(2π)·f̃  ⇒  f̃ = transfer/√(2π), phase-referenced to t = 0
                airy(w) / (2.0 * PI).sqrt()
            })
            .collect(),
    };
    let g = ModeFunction::from_spectrum(&spec, "iir_wideband");
    Ok(ImpulseResponse::from_samples(g))
}

/// `g(t) = Σⱼ κⱼ e^(iθⱼ) δ(t - jΔt)`, `j = 0, 1, 2`.
pub fn fir_response(stage: &FirStage, grid: &TimeGrid) -> Result<ImpulseResponse> {
    let steps = grid.steps_in(stage.delay).ok_or(Error::NonCommensurateDelay {
        delay: stage.delay,
        dt: grid.dt,
    })?;
    if steps == 0 {
        return Err(Error::NonCommensurateDelay {
            delay: stage.delay,
            dt: grid.dt,
        });
    }
    let i0 = grid.origin_index()?;
    if i0 + 2 * steps >= grid.n_samples {
        return Err(Error::GridSpan {
            start: 0.0,
            end: 2.0 * stage.delay,
            grid_start: grid.t0,
            grid_end: grid.end(),
        });
    }
    let mut g = ModeFunction::zeros(*grid, "fir");
    for j in 0..3 {
        g.values[i0 + j * steps] += C64::from_polar(stage.kappas[j] / grid.dt, stage.thetas[j]);
    }
    Ok(ImpulseResponse::from_samples(g))
}

/// Cascade of two filters: `(a * b)(t) = Σ a(s) b(t - s) ds` on the grid.
pub fn compose(a: &ImpulseResponse, b: &ImpulseResponse) -> Result<ImpulseResponse> {
    let grid = a.grid();
    if !grid.same_as(&b.grid()) {
        return Err(Error::GridMismatch);
    }
    let n = grid.n_samples as isize;
    let i0 = grid.origin_index()? as isize;
    let mut out = vec![C64::new(0.0, 0.0); grid.n_samples];
    for (m, am) in a.g.values.iter().enumerate() {
        if *am == C64::new(0.0, 0.0) {
            continue;
        }
        let am = am * grid.dt;
        for (i, o) in out.iter_mut().enumerate() {
            let j = i as isize + i0 - m as isize;
            if (0..n).contains(&j) {
                *o += am * b.g.values[j as usize];
            }
        }
    }
    let g = ModeFunction::new(grid, out, format!("{}*{}", a.label(), b.label()))?;
    Ok(ImpulseResponse::from_samples(g))
}

/// Heralded mode `N(g*(-t))`, re-anchored so it occupies the same support
/// window as `g` (the herald time only translates the mode).
pub fn detection_mode(ir: &ImpulseResponse) -> Result<ModeFunction> {
    let (first, last) = ir.g.support(1e-12).ok_or(Error::ZeroNorm("impulse response"))?;
    let mut f = ModeFunction::zeros(ir.grid(), format!("detection({})", ir.label()));
    for j in first..=last {
        f.values[j] = ir.g.values[first + last - j].conj();
    }
    f.normalized()
}

/// Fill the ancilla transfer `h̃ = √(1 - |g̃|²)` (phase 0) so the filter is a
/// lossless two-port.
pub fn two_port_complete(ir: &ImpulseResponse) -> Result<ImpulseResponse> {
    let max_gain = ir.max_gain();
    if max_gain > 1.0 + 1e-9 {
        return Err(Error::NonPassive { max_gain });
    }
    let h = ir
        .transmit_spectrum
        .iter()
        .map(|g| C64::new((1.0 - g.norm_sqr()).max(0.0).sqrt(), 0.0))
        .collect();
    Ok(ImpulseResponse {
        g: ir.g.clone(),
        transmit_spectrum: ir.transmit_spectrum.clone(),
        ancilla_spectrum: Some(h),
    })
}

/// Filter cascade as written in JSON configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterCascade {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iir: Option<IirConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fir: Option<FirConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IirConfig {
    pub hwhm_hz: f64,
    #[serde(default = "default_bandpass_hz")]
    pub bandpass_hwhm_hz: f64,
}

fn default_bandpass_hz() -> f64 {
    130e9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FirConfig {
    pub kappas: [f64; 3],
    pub thetas_rad: [f64; 3],
    pub delay_s: f64,
}

impl FilterCascade {
    pub fn time_bin(params: &WaveformParams) -> Self {
        Self::with_fir(params, FirStage::time_bin(params))
    }

    pub fn balanced_time_bin(params: &WaveformParams) -> Self {
        Self::with_fir(params, FirStage::balanced_time_bin(params))
    }

    fn with_fir(params: &WaveformParams, fir: FirStage) -> Self {
        Self {
            iir: Some(IirConfig {
                hwhm_hz: params.gamma / (2.0 * PI),
                bandpass_hwhm_hz: default_bandpass_hz(),
            }),
            fir: Some(FirConfig {
                kappas: fir.kappas,
                thetas_rad: fir.thetas,
                delay_s: fir.delay,
            }),
        }
    }

    /// Impulse response of the cascade on `grid`.
    pub fn response(&self, grid: &TimeGrid) -> Result<ImpulseResponse> {
        let mut acc = ImpulseResponse::unit_spike(grid)?;
        if let Some(iir) = &self.iir {
            let stage = IirStage::new(2.0 * PI * iir.hwhm_hz, 2.0 * PI * iir.bandpass_hwhm_hz)?;
            acc = iir_response(&stage, grid)?;
        }
        if let Some(fir) = &self.fir {
            let stage = FirStage::new(fir.kappas, fir.thetas_rad, fir.delay_s)?;
            acc = compose(&acc, &fir_response(&stage, grid)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{make_balanced_time_bin, make_time_bin, mode_match};

    fn setup() -> (WaveformParams, TimeGrid) {
        (WaveformParams::experiment(), TimeGrid::standard())
    }

    #[test]
    fn iir_shape_and_integral() {
        let (_, grid) = setup();
        let stage = IirStage::experiment();
        let ir = iir_response(&stage, &grid).unwrap();
        let i0 = grid.origin_index().unwrap();
        let g0 = ir.g.values[i0].re;
        let one_tau = (1.0 / stage.hwhm) / grid.dt;
        // 1/Γ is not a whole number of steps; compare with the analytic value there
        let at_tau = stage.hwhm * (-1.0f64).exp();
        assert!((g0 / at_tau - std::f64::consts::E).abs() < 1e-6);
        assert!(one_tau > 16.0);
        // Riemann sum of Γe^(-Γt) with left endpoints: Γdt/(1 - e^(-Γdt))
        let x = stage.hwhm * grid.dt;
        let expected = x / (1.0 - (-x).exp());
        let tail = expected * (-(stage.hwhm * grid.end())).exp();
        assert!((ir.g.integral().re - expected).abs() < tail * 1.01);
        assert!((ir.g.integral().re - 1.0).abs() < 1e-2);
    }

    #[test]
    fn iir_half_power_at_hwhm() {
        let (_, grid) = setup();
        let stage = IirStage::experiment();
        let ir = iir_response(&stage, &grid).unwrap();
        let ratio = ir.transfer_at(stage.hwhm).norm_sqr() / ir.transfer_at(0.0).norm_sqr();
        assert!((ratio - 0.5).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn iir_rejects_coarse_grid() {
        let grid = TimeGrid::with_origin(2e-9, 256, 64).unwrap();
        assert!(matches!(
            iir_response(&IirStage::experiment(), &grid),
            Err(Error::CoarseGrid { .. })
        ));
        assert!(IirStage::new(1.0, 5.0).is_err());
    }

    #[test]
    fn fir_spikes() {
        let (p, grid) = setup();
        let i0 = grid.origin_index().unwrap();
        let single = fir_response(&FirStage::new([1.0, 0.0, 0.0], [0.0; 3], p.delta_t).unwrap(), &grid).unwrap();
        let nz: Vec<usize> = (0..grid.n_samples)
            .filter(|&i| single.g.values[i].norm() > 0.0)
            .collect();
        assert_eq!(nz, vec![i0]);

        let tb = fir_response(&FirStage::time_bin(&p), &grid).unwrap();
        let ratio = tb.g.values[i0 + 80] / tb.g.values[i0];
        let expected = -(-p.gamma * p.delta_t).exp();
        assert!((ratio - C64::new(expected, 0.0)).norm() < 1e-12);

        let btb = fir_response(&FirStage::balanced_time_bin(&p), &grid).unwrap();
        let d = (-p.gamma * p.delta_t).exp();
        assert!((btb.g.values[i0 + 80] / btb.g.values[i0] - C64::new(-1.0 - d, 0.0)).norm() < 1e-12);
        assert!((btb.g.values[i0 + 160] / btb.g.values[i0] - C64::new(d, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn binomial_arm_ratio_gives_unequal_bins() {
        // 1 : 2d : d² also cancels the tail, but the second bin is d times lower
        let (p, grid) = setup();
        let d = (-p.gamma * p.delta_t).exp();
        let iir = iir_response(&IirStage::experiment(), &grid).unwrap();
        let fir = fir_response(
            &FirStage::new([1.0, 2.0 * d, d * d], [0.0, PI, 0.0], p.delta_t).unwrap(),
            &grid,
        )
        .unwrap();
        let g = compose(&iir, &fir).unwrap();
        let i0 = grid.origin_index().unwrap();
        let ratio = g.g.values[i0 + 80].re / g.g.values[i0].re;
        assert!((ratio + d).abs() < 1e-9, "{ratio}");
        assert!(g.g.values[i0 + 170].norm() < 1e-6 * g.g.values[i0].norm());
    }

    #[test]
    fn fir_rejects_noncommensurate_delay() {
        let (_, grid) = setup();
        let stage = FirStage::new([1.0, 0.5, 0.0], [0.0; 3], 20.1e-9).unwrap();
        assert!(matches!(
            fir_response(&stage, &grid),
            Err(Error::NonCommensurateDelay { .. })
        ));
        assert!(FirStage::new([0.0; 3], [0.0; 3], 1e-9).is_err());
    }

    #[test]
    fn spike_is_convolution_identity() {
        let (_, grid) = setup();
        let iir = iir_response(&IirStage::experiment(), &grid).unwrap();
        let out = compose(&iir, &ImpulseResponse::unit_spike(&grid).unwrap()).unwrap();
        for (a, b) in out.g.values.iter().zip(&iir.g.values) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn designed_cascades_give_target_modes() {
        let (p, grid) = setup();
        let tb = FilterCascade::time_bin(&p).response(&grid).unwrap();
        let f_tb = make_time_bin(&p, &grid).unwrap();
        assert!(mode_match(&detection_mode(&tb).unwrap(), &f_tb).unwrap() >= 1.0 - 1e-9);
        let btb = FilterCascade::balanced_time_bin(&p).response(&grid).unwrap();
        let f_btb = make_balanced_time_bin(&p, &grid).unwrap();
        assert!(mode_match(&detection_mode(&btb).unwrap(), &f_btb).unwrap() >= 1.0 - 1e-9);
        assert!(tb.causality_violation() < 1e-12);
        assert!(btb.causality_violation() < 1e-12);
    }

    #[test]
    fn detection_mode_is_an_involution_for_chirps() {
        let (_, grid) = setup();
        let i0 = grid.origin_index().unwrap();
        let mut g = ModeFunction::zeros(grid, "chirp");
        for k in 0..120 {
            let t = k as f64 * grid.dt;
            g.values[i0 + k] = C64::from_polar((-t / 15e-9).exp(), 2.0 * PI * 1e15 * t * t);
        }
        let g = g.normalized().unwrap();
        let once = detection_mode(&ImpulseResponse::from_samples(g.clone())).unwrap();
        // conjugated and reversed
        assert!((once.values[i0] - g.values[i0 + 119].conj()).norm() < 1e-9);
        let twice = detection_mode(&ImpulseResponse::from_samples(once)).unwrap();
        for (a, b) in twice.values.iter().zip(&g.values) {
            assert!((a - b).norm() < 1e-12 * 1e5);
        }
    }

    #[test]
    fn detection_mode_rejects_zero() {
        let (_, grid) = setup();
        let zero = ImpulseResponse::from_samples(ModeFunction::zeros(grid, "z"));
        assert!(detection_mode(&zero).is_err());
    }

    #[test]
    fn two_port_trivial_cases() {
        let (_, grid) = setup();
        let spike = ImpulseResponse::unit_spike(&grid).unwrap();
        let done = two_port_complete(&spike).unwrap();
        assert!(done.ancilla_spectrum.as_ref().unwrap().iter().all(|h| h.norm() < 1e-7));
        let half = ImpulseResponse::from_samples(spike.g.scaled(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)));
        let done = two_port_complete(&half).unwrap();
        for h in done.ancilla_spectrum.as_ref().unwrap() {
            assert!((h.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        let gain = ImpulseResponse::from_samples(spike.g.scaled(C64::new(1.1, 0.0)));
        assert!(matches!(two_port_complete(&gain), Err(Error::NonPassive { .. })));
    }

    #[test]
    fn cascade_config_parses() {
        let json = r#"{"iir": {"hwhm_hz": 8.2e6}, "fir": {"kappas": [1, 0.5, 0], "thetas_rad": [0, 3.14159, 0], "delay_s": 2e-8}}"#;
        let c: FilterCascade = serde_json::from_str(json).unwrap();
        assert_eq!(c.iir.as_ref().unwrap().bandpass_hwhm_hz, 130e9);
        assert!(serde_json::from_str::<FilterCascade>(r#"{"iir": {"hwhm_hz": 1, "typo": 2}}"#).is_err());
    }

    #[test]
    fn wideband_cavity_resonances() {
        // 10 ps steps resolve the 8.5 GHz resonance spacing
        let grid = TimeGrid::with_origin(10e-12, 1 << 15, 1 << 12).unwrap();
        let stage = IirStage::new(2.0 * PI * 8.2e6, 2.0 * PI * 3.6e9).unwrap();
        let fsr = 8.5e9;
        let wide = iir_response_wideband(&stage, fsr, &grid).unwrap();
        let at_dc = wide.transfer_at(0.0).norm();
        assert!((at_dc - 1.0).abs() < 1e-3, "{at_dc}");
        let half = wide.transfer_at(stage.hwhm).norm_sqr() / (at_dc * at_dc);
        assert!((half - 0.5).abs() < 1e-2, "{half}");
        let w = 2.0 * PI * fsr;
        let bp = stage.bandpass_hwhm / (stage.bandpass_hwhm.powi(2) + w * w).sqrt();
        let at_fsr = wide.transfer_at(w).norm();
        assert!((at_fsr / at_dc - bp).abs() < 1e-2, "{at_fsr} {bp}");
    }
}
