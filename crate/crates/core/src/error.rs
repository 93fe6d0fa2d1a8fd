use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different time grids")]
    GridMismatch,

    #[error("grid too coarse: {samples:.1} samples per {what}, need at least {required}")]
    CoarseGrid {
        what: &'static str,
        samples: f64,
        required: usize,
    },

    #[error("grid [{grid_start:e}, {grid_end:e}) s does not span the required window [{start:e}, {end:e}] s")]
    GridSpan {
        start: f64,
        end: f64,
        grid_start: f64,
        grid_end: f64,
    },

    #[error("time t = 0 does not fall on a grid sample (t0 = {t0:e} s, dt = {dt:e} s)")]
    NoOriginSample { t0: f64, dt: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("requested {requested} basis modes but the grid only has {available} samples")]
    BasisTooLarge { requested: usize, available: usize },

    #[error("delay {delay:e} s is not an integer multiple of dt = {dt:e} s")]
    NonCommensurateDelay { delay: f64, dt: f64 },

    #[error("{0} has zero norm")]
    ZeroNorm(&'static str),

    #[error("filter is not passive: max |g(w)| = {max_gain:.12} exceeds 1")]
    NonPassive { max_gain: f64 },

    #[error("no mode {mode} registered on channel {channel}")]
    UnknownMode { channel: usize, mode: usize },

    #[error("no channel {0} in state")]
    UnknownChannel(usize),

    #[error("operation needs two distinct channels, got channel {0} twice")]
    SameChannel(usize),

    #[error("channels {0} and {1} do not share a mode basis")]
    BasisMismatch(usize, usize),

    #[error("Gaussian state is not pure (det(2V) = {det:.12})")]
    NotPure { det: f64 },

    #[error("Fock expansion supports at most {max} modes, state has {modes}")]
    TooManyModes { modes: usize, max: usize },

    #[error("cutoff {cutoff} exceeds the supported maximum {max}")]
    CutoffTooLarge { cutoff: usize, max: usize },

    #[error("Fock truncation tail {tail:e} exceeds tolerance {tolerance:e} at cutoff {cutoff}; increase the cutoff")]
    TruncationTail { tail: f64, tolerance: f64, cutoff: usize },

    #[error("herald pattern {pattern:?} is impossible (probability {probability:e})")]
    ImpossiblePattern { pattern: Vec<usize>, probability: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("corrupt record file at byte {offset}: {reason}")]
    CorruptRecords { offset: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
