//! Downstream of state generation: phase-space functions, cat fidelity,
//! simulated homodyne records, PCA mode estimation and tomography.

mod cat;
mod pca;
mod phase_space;
mod records;
mod stats;
mod tomography;

pub use cat::{alpha_limit, best_cat, cat_fidelity, cat_tail, cat_vector, Parity, ALPHA_SCAN_MAX};
pub use pca::{estimate_waveform, pca_estimate, PcaResult, MIN_PCA_RECORDS};
pub use phase_space::{hermite_functions, marginal, negativity_at_origin, wigner, wigner_at, WignerField, WignerGrid};
pub use records::{
    analysis_grid, event_rng, low_pass, marginal_sampler, project_records, simulate_probe_records, simulate_records,
    Background, HomodyneRecord, RecordKind, RecordSet, SimulationConfig, MIN_BASIS_SIZE,
};
pub use stats::{ks_p_value, ks_statistic, InverseCdf, Pchip, TabulatedCdf};
pub use tomography::{
    mle_tomography, TomographyResult, BINS_PER_PHASE, LL_TOLERANCE, MAX_ITERATIONS, MIN_TOMOGRAPHY_SAMPLES,
};
