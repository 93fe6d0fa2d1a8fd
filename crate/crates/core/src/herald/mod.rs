//! Heralded single-mode states: photon-number projections of a Gaussian
//! state's herald modes, photon subtraction, and the experimental
//! imperfection model.

mod fock;

pub use fock::{
    fock_amplitudes, fock_amplitudes_with_tolerance, generating_function, FockAmplitudes, GeneratingFunction,
    DEFAULT_TAIL_TOLERANCE, MAX_CUTOFF, MAX_MODES,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::gaussian::{BeamSplitterSpec, GaussianState};
use crate::linalg::{self, DensityMatrix};
use crate::modes::{make_time_bin, TimeGrid, WaveformParams};
use crate::{Error, Result, C64, CONVENTION};

/// Loss and noise figures of the setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionModel {
    pub eta_state: f64,
    pub eta_tap: f64,
    pub eta_snspd: f64,
    pub fake_rate_fraction: f64,
    pub eta_homodyne: f64,
}

impl Default for ImperfectionModel {
    fn default() -> Self {
        Self {
            eta_state: 1.0,
            eta_tap: 0.05,
            eta_snspd: 0.63,
            fake_rate_fraction: 0.0,
            eta_homodyne: 0.93,
        }
    }
}

impl ImperfectionModel {
    /// Lossless signal path and no fake heralds.
    pub fn ideal() -> Self {
        Self {
            eta_state: 1.0,
            fake_rate_fraction: 0.0,
            eta_homodyne: 1.0,
            ..Self::default()
        }
    }

    /// Same model with a perfect homodyne detector, for use when the
    /// homodyne loss is applied elsewhere.
    pub fn without_homodyne(&self) -> Self {
        Self {
            eta_homodyne: 1.0,
            ..*self
        }
    }

    pub fn eta_total(&self) -> f64 {
        self.eta_state * self.eta_homodyne
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eta_state", self.eta_state),
            ("eta_tap", self.eta_tap),
            ("eta_snspd", self.eta_snspd),
            ("fake_rate_fraction", self.fake_rate_fraction),
            ("eta_homodyne", self.eta_homodyne),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub pattern: Vec<usize>,
    pub filter_label: String,
    pub cutoff: usize,
    pub imperfections: Option<ImperfectionModel>,
}

/// Conditional state of the signal mode together with the unconditioned
/// state used for fake heralds.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedState {
    pub rho: DensityMatrix,
    pub p_success: f64,
    pub provenance: Provenance,
    pub unheralded: DensityMatrix,
}

impl HeraldedState {
    /// True when no photon was heralded, i.e. the output is Gaussian.
    pub fn is_gaussian_herald(&self) -> bool {
        self.provenance.pattern.iter().all(|&n| n == 0)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Matrix {
            re: Vec<Vec<f64>>,
            im: Vec<Vec<f64>>,
        }
        #[derive(Serialize)]
        struct Export<'a> {
            format: &'static str,
            convention: &'static str,
            p_success: f64,
            provenance: &'a Provenance,
            rho: Matrix,
        }
        let d = self.rho.nrows();
        let e = Export {
            format: "qawg.heralded_state/1",
            convention: CONVENTION,
            p_success: self.p_success,
            provenance: &self.provenance,
            rho: Matrix {
                re: (0..d).map(|i| (0..d).map(|j| self.rho[(i, j)].re).collect()).collect(),
                im: (0..d).map(|i| (0..d).map(|j| self.rho[(i, j)].im).collect()).collect(),
            },
        };
        Ok(serde_json::to_string_pretty(&e)?)
    }
}

/// Read a density matrix written by [`HeraldedState::to_json`].
pub fn rho_from_json(text: &str) -> Result<DensityMatrix> {
    #[derive(Deserialize)]
    struct Matrix {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }
    #[derive(Deserialize)]
    struct Import {
        rho: Matrix,
    }
    let imp: Import = serde_json::from_str(text)?;
    let d = imp.rho.re.len();
    if imp.rho.im.len() != d || imp.rho.re.iter().chain(&imp.rho.im).any(|r| r.len() != d) {
        return Err(Error::Config("density matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        C64::new(imp.rho.re[i][j], imp.rho.im[i][j])
    }))
}

/// Project modes `1..M` of the amplitude tensor onto `pattern`; mode 0 is
/// the signal.
pub fn herald_project(amps: &FockAmplitudes, pattern: &[usize]) -> Result<HeraldedState> {
    herald_project_labeled(amps, pattern, "unlabeled")
}

pub fn herald_project_labeled(amps: &FockAmplitudes, pattern: &[usize], filter_label: &str) -> Result<HeraldedState> {
    if pattern.len() + 1 != amps.n_modes {
        return Err(Error::InvalidParameter(format!(
            "pattern has {} entries but the state has {} herald modes",
            pattern.len(),
            amps.n_modes - 1
        )));
    }
    if let Some(&n) = pattern.iter().find(|&&n| n > amps.cutoff) {
        return Err(Error::InvalidParameter(format!(
            "pattern entry {n} exceeds cutoff {}",
            amps.cutoff
        )));
    }
    let dim = amps.dim();
    let v = DVector::from_fn(dim, |n1, _| {
        let mut idx = vec![n1];
        idx.extend_from_slice(pattern);
        amps.get(&idx)
    });
    let p = v.norm_squared();
    if p < 1e-30 {
        return Err(Error::ImpossiblePattern {
            pattern: pattern.to_vec(),
            probability: p,
        });
    }
    let rho = linalg::projector(&v)?;
    let mut unheralded = DMatrix::zeros(dim, dim);
    let block = dim.pow((amps.n_modes - 1) as u32);
    for rest in 0..block {
        let w = DVector::from_fn(dim, |n1, _| amps.tensor[n1 * block + rest]);
        unheralded += &w * w.adjoint();
    }
    let tr = unheralded.trace().re;
    unheralded /= C64::new(tr, 0.0);
    Ok(HeraldedState {
        rho,
        p_success: p,
        provenance: Provenance {
            pattern: pattern.to_vec(),
            filter_label: filter_label.to_string(),
            cutoff: amps.cutoff,
            imperfections: None,
        },
        unheralded,
    })
}

/// Herald directly from a larger Gaussian state: reduce to the signal slot
/// followed by the herald slots, then project.
pub fn herald(
    state: &GaussianState,
    signal: usize,
    heralds: &[usize],
    pattern: &[usize],
    cutoff: usize,
) -> Result<HeraldedState> {
    let mut slots = vec![signal];
    slots.extend_from_slice(heralds);
    let reduced = state.reduce(&slots)?;
    let amps = fock_amplitudes(&reduced, cutoff)?;
    herald_project_labeled(&amps, pattern, &state.slots()[signal].mode.label)
}

/// The squeezed signal and tap channels before detection: squeezing `-r`
/// (anti-squeezed x, so cats lie along real α) followed by the tap.
pub fn subtraction_state(r: f64, tap: f64) -> Result<GaussianState> {
    if !(tap > 0.0 && tap < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tap reflectance {tap} must lie in (0, 1)"
        )));
    }
    let grid = TimeGrid::standard();
    let f = make_time_bin(&WaveformParams::experiment(), &grid)?.with_label("f_TB");
    GaussianState::vacuum_with_bases(vec![vec![f.clone()], vec![f]])?
        .squeeze_mode(0, 0, -r)?
        .beam_split(&BeamSplitterSpec::tap(tap)?, 0, 1)
}

/// `n`-photon subtraction from single-mode squeezed vacuum in mode f_TB.
pub fn photon_subtract(r: f64, tap: f64, n: usize, cutoff: usize) -> Result<HeraldedState> {
    let st = subtraction_state(r, tap)?;
    let amps = fock_amplitudes(&st, cutoff)?;
    herald_project_labeled(&amps, &[n], "f_TB")
}

/// Signal-path loss `η_total = eta_state·eta_homodyne`, then a fraction
/// `q` of fake heralds carrying the equally lossy unheralded state.
pub fn apply_imperfections(hs: &HeraldedState, imp: &ImperfectionModel) -> Result<HeraldedState> {
    imp.validate()?;
    let eta = imp.eta_total();
    let q = imp.fake_rate_fraction;
    let lossy = linalg::pure_loss(&hs.rho, eta)?;
    let fake = linalg::pure_loss(&hs.unheralded, eta)?;
    let rho = lossy * C64::new(1.0 - q, 0.0) + &fake * C64::new(q, 0.0);
    let mut provenance = hs.provenance.clone();
    provenance.imperfections = Some(*imp);
    Ok(HeraldedState {
        rho: linalg::hermitian_part(&rho),
        p_success: hs.p_success,
        provenance,
        unheralded: fake,
    })
}

/// Order-of-magnitude herald rate `p_success × bandwidth × η_snspd`.
/// The tap reflectance is already inside `p_success`.
pub fn success_rate(hs: &HeraldedState, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    let eta = hs
        .provenance
        .imperfections
        .map_or(ImperfectionModel::default().eta_snspd, |i| i.eta_snspd);
    Ok(hs.p_success * bandwidth_hz * eta)
}
