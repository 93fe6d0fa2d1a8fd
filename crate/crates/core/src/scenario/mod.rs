//! JSON scenario files and the end-to-end runners behind the `qawg` binary.

mod fit;
mod runners;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use fit::{fit_loss_budget, fit_matched_r, parity_of, state_metrics, LossFit, StateMetrics};
pub use runners::{
    analyze, analyze_records, closed_loop, design_filter, format_table, reproduce_paper, simulate, AnalysisReport,
    ClosedLoop, OutputFormat, ReproduceOptions, TableRow,
};

use crate::analysis::{analysis_grid, Background, SimulationConfig, MIN_BASIS_SIZE};
use crate::filters::FilterCascade;
use crate::gaussian::SqueezingSpectrum;
use crate::herald::{apply_imperfections, photon_subtract, HeraldedState, ImperfectionModel, MAX_CUTOFF};
use crate::io::{read_mode_file, sha256_hex, Meta};
use crate::modes::{make_balanced_time_bin, make_time_bin, ModeFunction, TimeGrid, WaveformParams};
use crate::Error;

pub const SCHEMA: &str = "qawg.scenario/1";

/// Failure of a runner, with a stable process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{} acceptance band violation(s):\n{}", .0.len(), .0.join("\n"))]
    Band(Vec<String>),
    #[error("output error: {0}")]
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Data(_) => 3,
            Self::Band(_) => 4,
            Self::Output(_) => 1,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::CorruptRecords { .. } | Error::InsufficientData(_) | Error::GridMismatch => {
                Self::Data(e.to_string())
            }
            Error::Io(_) => Self::Output(e.to_string()),
            Error::TruncationTail { cutoff, .. } => Self::Config(format!(
                "{e}; advisory: raise run.cutoff above {cutoff} (maximum {MAX_CUTOFF}) or lower the squeezing"
            )),
            other => Self::Config(other.to_string()),
        }
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveformSpec {
    TimeBin,
    BalancedTimeBin,
    /// Mode file (CSV or JSON as written by this crate), relative to the
    /// scenario file.
    Custom {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    /// Cavity HWHM Γ/2π in Hz.
    pub hwhm_hz: f64,
    pub delta_t_s: f64,
}

impl ParamsConfig {
    pub fn waveform_params(&self) -> crate::Result<WaveformParams> {
        WaveformParams::new(2.0 * PI * self.hwhm_hz, self.delta_t_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingConfig {
    /// Squeezing of the heralded mode (x anti-squeezed).
    pub r: f64,
    /// Broadband r̃(ω) used for the single-mode purity certificate; flat
    /// at `r` when absent.
    #[serde(default)]
    pub spectrum: Option<SqueezingSpectrum>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    #[default]
    SqueezedVacuum,
    Vacuum,
}

fn default_phases() -> Vec<f64> {
    (0..6).map(|k| 30.0 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_events: usize,
    #[serde(default = "default_phases")]
    pub phases_deg: Vec<f64>,
    pub seed: u64,
    pub cutoff: usize,
    pub basis_size: usize,
    /// Vacuum-reference records; defaults to `n_events`.
    #[serde(default)]
    pub n_vacuum: Option<usize>,
    #[serde(default)]
    pub background: BackgroundKind,
    #[serde(default)]
    pub low_pass_hz: Option<f64>,
}

/// Reference values and acceptance bands for reproduce-paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    pub w0_reported: f64,
    pub w0_band: [f64; 2],
    pub alpha: f64,
    pub fidelity_reported: f64,
    pub fidelity_band: [f64; 2],
    pub mode_match_reported: f64,
    pub mode_match_floor: f64,
    pub tomography_fidelity_floor: f64,
    pub tomography_w0_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub label: String,
    #[serde(default)]
    pub note: Option<String>,
    pub waveform: WaveformSpec,
    pub params: ParamsConfig,
    /// Filter cascade; the preset for the waveform when absent.
    #[serde(default)]
    pub filter: Option<FilterCascade>,
    pub squeezing: SqueezingConfig,
    pub tap: f64,
    pub herald_pattern: Vec<usize>,
    pub imperfections: ImperfectionModel,
    pub run: RunConfig,
    #[serde(default)]
    pub targets: Option<Targets>,
}

/// A validated scenario with its source hash.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub config_hash: String,
    base_dir: Option<PathBuf>,
}

const EXPERIMENT_TIME_BIN: &str = include_str!("../../scenarios/experiment_time_bin.json");
const EXPERIMENT_BALANCED: &str = include_str!("../../scenarios/experiment_balanced_time_bin.json");

impl Scenario {
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> RunResult<Self> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| RunError::Config(format!("invalid scenario JSON: {e}")))?;
        let s = Self {
            config,
            config_hash: sha256_hex(text.as_bytes()),
            base_dir: base_dir.map(Path::to_path_buf),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent()).map_err(|e| match e {
            RunError::Config(m) => RunError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn experiment_time_bin() -> Self {
        Self::from_json(EXPERIMENT_TIME_BIN, None).expect("bundled scenario is valid")
    }

    pub fn experiment_balanced_time_bin() -> Self {
        Self::from_json(EXPERIMENT_BALANCED, None).expect("bundled scenario is valid")
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.config.run.seed = s;
        }
        self
    }

    pub fn meta(&self) -> Meta {
        Meta::new(self.config_hash.clone(), Some(self.config.run.seed))
    }

    fn validate(&self) -> RunResult<()> {
        let c = &self.config;
        let bad = |m: String| Err(RunError::Config(m));
        if c.schema != SCHEMA {
            return bad(format!("schema must be \"{SCHEMA}\", got \"{}\"", c.schema));
        }
        c.params.waveform_params()?;
        if !(c.squeezing.r >= 0.0 && c.squeezing.r <= 1.5) {
            return bad(format!("squeezing.r = {} outside [0, 1.5]", c.squeezing.r));
        }
        if let Some(s) = &c.squeezing.spectrum {
            s.validate()?;
        }
        if !(c.tap > 0.0 && c.tap < 1.0) {
            return bad(format!("tap = {} outside (0, 1)", c.tap));
        }
        c.imperfections.validate()?;
        if (c.imperfections.eta_tap - c.tap).abs() > 1e-12 {
            return bad(format!(
                "imperfections.eta_tap = {} disagrees with tap = {}",
                c.imperfections.eta_tap, c.tap
            ));
        }
        if c.herald_pattern.len() != 1 {
            return bad(format!(
                "scenario files describe single-channel subtraction; herald_pattern must have one entry, got {:?}",
                c.herald_pattern
            ));
        }
        let run = &c.run;
        if run.cutoff == 0 || run.cutoff > MAX_CUTOFF {
            return bad(format!("run.cutoff = {} outside 1..={MAX_CUTOFF}", run.cutoff));
        }
        if run.basis_size < MIN_BASIS_SIZE {
            return bad(format!("run.basis_size = {} below {MIN_BASIS_SIZE}", run.basis_size));
        }
        if run.phases_deg.is_empty() || run.phases_deg.iter().any(|p| !p.is_finite()) {
            return bad("run.phases_deg must be a non-empty list of finite angles".into());
        }
        if let Some(fc) = run.low_pass_hz {
            if !(fc > 0.0) {
                return bad(format!("run.low_pass_hz = {fc} must be positive"));
            }
        }
        if let WaveformSpec::Custom { path } = &c.waveform {
            let p = self.resolve(path);
            if !p.exists() {
                return bad(format!("waveform file {} does not exist", p.display()));
            }
            if c.filter.is_none() {
                return bad("a custom waveform needs an explicit filter cascade".into());
            }
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn waveform_params(&self) -> WaveformParams {
        self.config.params.waveform_params().expect("validated")
    }

    pub fn filter(&self) -> FilterCascade {
        let p = self.waveform_params();
        match (&self.config.filter, &self.config.waveform) {
            (Some(f), _) => f.clone(),
            (None, WaveformSpec::BalancedTimeBin) => FilterCascade::balanced_time_bin(&p),
            (None, _) => FilterCascade::time_bin(&p),
        }
    }

    /// Target waveform on `grid`; custom files keep their own grid.
    pub fn target_mode(&self, grid: &TimeGrid) -> RunResult<ModeFunction> {
        let p = self.waveform_params();
        Ok(match &self.config.waveform {
            WaveformSpec::TimeBin => make_time_bin(&p, grid)?.with_label("f_TB"),
            WaveformSpec::BalancedTimeBin => make_balanced_time_bin(&p, grid)?.with_label("f_BTB"),
            WaveformSpec::Custom { path } => read_mode_file(&self.resolve(path))
                .map_err(|e| RunError::Config(format!("cannot load waveform {}: {e}", path.display())))?,
        })
    }

    /// Grid of simulated homodyne traces.
    pub fn record_grid(&self) -> RunResult<TimeGrid> {
        Ok(match &self.config.waveform {
            WaveformSpec::Custom { .. } => self.target_mode(&analysis_grid())?.grid,
            _ => analysis_grid(),
        })
    }

    /// Lossless heralded state.
    pub fn ideal_state(&self) -> RunResult<HeraldedState> {
        let c = &self.config;
        Ok(photon_subtract(
            c.squeezing.r,
            c.tap,
            c.herald_pattern[0],
            c.run.cutoff,
        )?)
    }

    /// Heralded state with every imperfection, as seen by the homodyne detector.
    pub fn measured_state(&self, ideal: &HeraldedState) -> RunResult<HeraldedState> {
        Ok(apply_imperfections(ideal, &self.config.imperfections)?)
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        let run = &self.config.run;
        SimulationConfig {
            basis_size: run.basis_size,
            n_events: run.n_events,
            n_vacuum: run.n_vacuum.unwrap_or(run.n_events),
            phases: run.phases_deg.iter().map(|d| d.to_radians()).collect(),
            seed: run.seed,
            background: match run.background {
                BackgroundKind::SqueezedVacuum => Background::SqueezedVacuum {
                    r: self.config.squeezing.r,
                },
                BackgroundKind::Vacuum => Background::Vacuum,
            },
            white_complement: false,
            low_pass_hz: run.low_pass_hz,
        }
    }

    pub fn squeezing_spectrum(&self) -> SqueezingSpectrum {
        self.config
            .squeezing
            .spectrum
            .clone()
            .unwrap_or(SqueezingSpectrum::Flat {
                r: self.config.squeezing.r,
            })
    }
}
