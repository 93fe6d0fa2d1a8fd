use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::phase_space::marginal;
use super::stats::InverseCdf;
use crate::herald::{HeraldedState, ImperfectionModel};
use crate::io::Meta;
use crate::linalg::{pure_loss, DensityMatrix};
use crate::modes::{complete_basis, ModeFunction, TimeGrid};
use crate::{Error, Result, C64};

pub const MIN_BASIS_SIZE: usize = 8;
const SAMPLER_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Heralded,
    VacuumReference,
    PulseProbe,
}

impl RecordKind {
    fn code(self) -> f64 {
        match self {
            Self::Heralded => 0.0,
            Self::VacuumReference => 1.0,
            Self::PulseProbe => 2.0,
        }
    }

    fn from_code(c: f64) -> Option<Self> {
        match c {
            x if x == 0.0 => Some(Self::Heralded),
            x if x == 1.0 => Some(Self::VacuumReference),
            x if x == 2.0 => Some(Self::PulseProbe),
            _ => None,
        }
    }
}

/// One homodyne trace, in vacuum units (per-sample vacuum variance 1/2 when
/// the full white background is simulated).
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneRecord {
    pub theta_lo: f64,
    pub kind: RecordKind,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordSet {
    pub grid: TimeGrid,
    pub seed: u64,
    pub records: Vec<HomodyneRecord>,
}

/// State of the modes orthogonal to the signal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Background {
    Vacuum,
    /// Broadband squeezed vacuum with x anti-squeezed, seen through the
    /// same losses as the signal (tap transmission, eta_state, homodyne).
    SqueezedVacuum {
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub basis_size: usize,
    pub n_events: usize,
    pub n_vacuum: usize,
    pub phases: Vec<f64>,
    pub seed: u64,
    pub background: Background,
    /// Add white vacuum noise outside the simulated basis span.
    pub white_complement: bool,
    /// Single-pole detector low-pass (Hz), off when `None`.
    pub low_pass_hz: Option<f64>,
}

impl SimulationConfig {
    /// Six phases in 30° steps, 20,000 events each.
    pub fn paper(seed: u64, r: f64) -> Self {
        Self {
            basis_size: MIN_BASIS_SIZE,
            n_events: 20_000,
            n_vacuum: 20_000,
            phases: (0..6).map(|k| k as f64 * PI / 6.0).collect(),
            seed,
            background: Background::SqueezedVacuum { r },
            white_complement: false,
            low_pass_hz: None,
        }
    }
}

/// Grid used for simulated records: 1 ns steps from -30 ns, 100 samples.
pub fn analysis_grid() -> TimeGrid {
    TimeGrid::with_origin(1e-9, 100, 30).expect("valid analysis grid")
}

impl RecordSet {
    pub fn of_kind(&self, kind: RecordKind) -> Vec<&HomodyneRecord> {
        self.records.iter().filter(|r| r.kind == kind).collect()
    }

    /// Distinct LO phases among heralded records, ascending.
    pub fn phases(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.kind == RecordKind::Heralded)
            .map(|r| r.theta_lo)
            .collect();
        p.sort_by(|a, b| a.total_cmp(b));
        p.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        p
    }

    pub fn heralded_at(&self, theta: f64) -> Vec<&HomodyneRecord> {
        self.records
            .iter()
            .filter(|r| r.kind == RecordKind::Heralded && (r.theta_lo - theta).abs() < 1e-9)
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.grid.n_samples;
        let mut out = Vec::with_capacity(HEADER_LEN + self.records.len() * (16 + 8 * n));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.t0.to_le_bytes());
        out.extend_from_slice(&self.grid.dt.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(&r.theta_lo.to_le_bytes());
            out.extend_from_slice(&r.kind.code().to_le_bytes());
            for v in &r.trace {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(8, "file header")?;
        if magic != MAGIC {
            return Err(corrupt(0, "bad magic; not a records file"));
        }
        let version = u32::from_le_bytes(cur.take(4, "version")?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(corrupt(8, &format!("unsupported format version {version}")));
        }
        let n = cur.u64("sample count")? as usize;
        let t0 = cur.f64("t0")?;
        let dt = cur.f64("dt")?;
        let seed = cur.u64("seed")?;
        let count_pos = cur.pos;
        let count = cur.u64("record count")? as usize;
        let grid = TimeGrid::new(t0, dt, n).map_err(|e| corrupt(12, &e.to_string()))?;
        let rec_len = 16 + 8 * n;
        let expected = HEADER_LEN as u128 + count as u128 * rec_len as u128;
        if (bytes.len() as u128) < expected {
            let complete = (bytes.len() - HEADER_LEN.min(bytes.len())) / rec_len;
            return Err(corrupt(
                (HEADER_LEN + complete * rec_len) as u64,
                &format!("file truncated inside record {complete} of {count}"),
            ));
        }
        if (bytes.len() as u128) > expected {
            return Err(corrupt(expected as u64, "trailing bytes after last record"));
        }
        let _ = count_pos;
        let mut records = Vec::with_capacity(count);
        for _ in 0..count {
            let start = cur.pos as u64;
            let theta_lo = cur.f64("phase")?;
            let code = cur.f64("kind")?;
            let kind = RecordKind::from_code(code)
                .ok_or_else(|| corrupt(start + 8, &format!("unknown record kind {code}")))?;
            let mut trace = Vec::with_capacity(n);
            for _ in 0..n {
                let at = cur.pos as u64;
                let v = cur.f64("sample")?;
                if !v.is_finite() {
                    return Err(corrupt(at, "non-finite sample"));
                }
                trace.push(v);
            }
            if !theta_lo.is_finite() {
                return Err(corrupt(start, "non-finite phase"));
            }
            records.push(HomodyneRecord { theta_lo, kind, trace });
        }
        Ok(Self { grid, seed, records })
    }

    /// JSON sidecar describing a binary records file.
    pub fn sidecar_json(&self, meta: &Meta) -> Result<String> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            format: &'static str,
            meta: &'a Meta,
            grid: TimeGrid,
            n_records: usize,
            phases_rad: Vec<f64>,
            heralded: usize,
            vacuum_reference: usize,
            pulse_probe: usize,
            layout: &'static str,
        }
        let s = Sidecar {
            format: "qawg.records/1",
            meta,
            grid: self.grid,
            n_records: self.records.len(),
            phases_rad: self.phases(),
            heralded: self.of_kind(RecordKind::Heralded).len(),
            vacuum_reference: self.of_kind(RecordKind::VacuumReference).len(),
            pulse_probe: self.of_kind(RecordKind::PulseProbe).len(),
            layout: "magic[8] version:u32 n_samples:u64 t0:f64 dt:f64 seed:u64 n_records:u64, then per record theta:f64 kind:f64 samples:f64[n_samples]; little-endian",
        };
        Ok(serde_json::to_string_pretty(&s)?)
    }
}

const MAGIC: &[u8; 8] = b"QAWGREC1";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 * 5;

fn corrupt(offset: u64, reason: &str) -> Error {
    Error::CorruptRecords {
        offset,
        reason: reason.to_string(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(corrupt(
                self.pos as u64,
                &format!("unexpected end of file reading {what}"),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Independent RNG stream per (seed, stream, event).
pub fn event_rng(seed: u64, stream: u64, event: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&event.to_le_bytes());
    key[24..].copy_from_slice(b"qawg-evt");
    ChaCha8Rng::from_seed(key)
}

/// Sampled mode basis: column `l` holds `√dt f_l(t_i)`.
struct Synthesizer {
    u: DMatrix<f64>,
    white: bool,
    low_pass: Option<f64>,
    grid: TimeGrid,
}

impl Synthesizer {
    fn new(f: &ModeFunction, basis_size: usize, white: bool, low_pass: Option<f64>) -> Result<Self> {
        if basis_size < MIN_BASIS_SIZE {
            return Err(Error::InvalidParameter(format!(
                "basis_size {basis_size} below the minimum of {MIN_BASIS_SIZE}"
            )));
        }
        if !f.is_real(1e-12) {
            return Err(Error::Unsupported(
                "record simulation needs a real mode function".into(),
            ));
        }
        let basis = complete_basis(f, basis_size)?;
        let sdt = f.grid.dt.sqrt();
        let u = DMatrix::from_fn(f.grid.n_samples, basis_size, |i, l| basis[l].values[i].re * sdt);
        if let Some(fc) = low_pass {
            if !(fc > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "low-pass corner must be positive, got {fc}"
                )));
            }
        }
        Ok(Self {
            u,
            white,
            low_pass,
            grid: f.grid,
        })
    }

    fn trace(&self, coeffs: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.u.nrows();
        let mut out = vec![0.0; n];
        for (l, c) in coeffs.iter().enumerate() {
            let col = self.u.column(l);
            for i in 0..n {
                out[i] += col[i] * c;
            }
        }
        if self.white {
            let normal = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
            let w: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
            for l in 0..self.u.ncols() {
                let col = self.u.column(l);
                let proj: f64 = col.iter().zip(&w).map(|(a, b)| a * b).sum();
                for i in 0..n {
                    out[i] -= proj * col[i];
                }
            }
            for i in 0..n {
                out[i] += w[i];
            }
        }
        if let Some(fc) = self.low_pass {
            out = low_pass(&out, &self.grid, fc);
        }
        out
    }
}

/// Single-pole low-pass `1/(1 + iω/ω_c)` applied circularly via FFT.
pub fn low_pass(trace: &[f64], grid: &TimeGrid, corner_hz: f64) -> Vec<f64> {
    let n = trace.len();
    let wc = 2.0 * PI * corner_hz;
    let mut buf: Vec<C64> = trace.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        *z /= C64::new(1.0, grid.omega(k) / wc);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re / n as f64).collect()
}

/// Inverse-CDF sampler of the quadrature distribution at `theta`.
pub fn marginal_sampler(rho: &DensityMatrix, theta: f64) -> Result<InverseCdf> {
    let xm = (2.0 * rho.nrows() as f64).sqrt() + 6.0;
    let xs: Vec<f64> = (0..SAMPLER_POINTS)
        .map(|i| -xm + 2.0 * xm * i as f64 / (SAMPLER_POINTS - 1) as f64)
        .collect();
    InverseCdf::from_density(&xs, &marginal(rho, theta, &xs))
}

/// Heralded homodyne traces at each LO phase plus vacuum references.
///
/// The homodyne efficiency of `imp` is applied here, so `hs` should carry
/// only the pre-detection imperfections.
pub fn simulate_records(
    hs: &HeraldedState,
    f: &ModeFunction,
    config: &SimulationConfig,
    imp: &ImperfectionModel,
) -> Result<RecordSet> {
    imp.validate()?;
    if config.phases.is_empty() {
        return Err(Error::InvalidParameter("at least one LO phase is required".into()));
    }
    let f = f.normalized()?;
    let synth = Synthesizer::new(&f, config.basis_size, config.white_complement, config.low_pass_hz)?;
    let rho = pure_loss(&hs.rho, imp.eta_homodyne)?;
    let (var_x, var_p) = match config.background {
        Background::Vacuum => (0.5, 0.5),
        Background::SqueezedVacuum { r } => {
            let eta = (1.0 - imp.eta_tap) * imp.eta_state * imp.eta_homodyne;
            (
                0.5 * (eta * (2.0 * r).exp() + 1.0 - eta),
                0.5 * (eta * (-2.0 * r).exp() + 1.0 - eta),
            )
        }
    };
    let samplers = config
        .phases
        .iter()
        .map(|&t| marginal_sampler(&rho, t))
        .collect::<Result<Vec<_>>>()?;
    let k = config.basis_size;
    let mut records = Vec::with_capacity(config.phases.len() * config.n_events + config.n_vacuum);
    for (p, &theta) in config.phases.iter().enumerate() {
        let sigma = (var_x * theta.cos().powi(2) + var_p * theta.sin().powi(2)).sqrt();
        let normal = Normal::new(0.0, sigma).unwrap();
        let sampler = &samplers[p];
        let batch: Vec<HomodyneRecord> = (0..config.n_events)
            .into_par_iter()
            .map(|e| {
                let mut rng = event_rng(config.seed, p as u64, e as u64);
                let mut coeffs = Vec::with_capacity(k);
                coeffs.push(sampler.sample(rng.random::<f64>()));
                coeffs.extend((1..k).map(|_| normal.sample(&mut rng)));
                HomodyneRecord {
                    theta_lo: theta,
                    kind: RecordKind::Heralded,
                    trace: synth.trace(&coeffs, &mut rng),
                }
            })
            .collect();
        records.extend(batch);
    }
    records.extend(vacuum_batch(
        &synth,
        config.seed,
        config.phases.len() as u64,
        config.n_vacuum,
        k,
    ));
    Ok(RecordSet {
        grid: f.grid,
        seed: config.seed,
        records,
    })
}

fn vacuum_batch(synth: &Synthesizer, seed: u64, stream: u64, n: usize, k: usize) -> Vec<HomodyneRecord> {
    let normal = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    (0..n)
        .into_par_iter()
        .map(|e| {
            let mut rng = event_rng(seed, stream, e as u64);
            let coeffs: Vec<f64> = (0..k).map(|_| normal.sample(&mut rng)).collect();
            HomodyneRecord {
                theta_lo: 0.0,
                kind: RecordKind::VacuumReference,
                trace: synth.trace(&coeffs, &mut rng),
            }
        })
        .collect()
}

/// Impulse-response characterization: a coherent probe of amplitude
/// `alpha` in mode `g`, vacuum elsewhere, plus vacuum references.
pub fn simulate_probe_records(g: &ModeFunction, alpha: f64, config: &SimulationConfig) -> Result<RecordSet> {
    let g = g.normalized()?;
    let synth = Synthesizer::new(&g, config.basis_size, config.white_complement, config.low_pass_hz)?;
    let k = config.basis_size;
    let normal = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    let mut records: Vec<HomodyneRecord> = (0..config.n_events)
        .into_par_iter()
        .map(|e| {
            let mut rng = event_rng(config.seed, u64::MAX, e as u64);
            let mut coeffs: Vec<f64> = (0..k).map(|_| normal.sample(&mut rng)).collect();
            coeffs[0] += 2f64.sqrt() * alpha;
            HomodyneRecord {
                theta_lo: 0.0,
                kind: RecordKind::PulseProbe,
                trace: synth.trace(&coeffs, &mut rng),
            }
        })
        .collect();
    records.extend(vacuum_batch(&synth, config.seed, u64::MAX - 1, config.n_vacuum, k));
    Ok(RecordSet {
        grid: g.grid,
        seed: config.seed,
        records,
    })
}

/// Quadrature samples `(θ, x_f)` with `x_f = Σ √dt f(tᵢ) xᵢ·√dt/dt`.
pub fn project_records(records: &[&HomodyneRecord], f: &ModeFunction) -> Result<Vec<(f64, f64)>> {
    let f = f.normalized()?;
    let dt = f.grid.dt;
    records
        .iter()
        .map(|r| {
            if r.trace.len() != f.grid.n_samples {
                return Err(Error::GridMismatch);
            }
            let x: f64 = r.trace.iter().zip(&f.values).map(|(x, v)| v.re * x).sum::<f64>() * dt.sqrt();
            Ok((r.theta_lo, x))
        })
        .collect()
}
