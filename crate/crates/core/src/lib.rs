//! Heralded non-Gaussian optical states with engineered temporal waveforms.
//!
//! The crate follows a single pipeline:
//!
//! 1. [`modes`]: temporal mode functions on a uniform grid, target
//!    waveforms (time-bin, balanced time-bin), overlaps and basis completion.
//! 2. [`filters`]: cavity (IIR) and delay-interferometer (FIR) stages, their
//!    impulse responses, two-port completion and the heralded detection mode.
//! 3. [`gaussian`]: finite-mode Gaussian states (squeezing, EPR pairs, beam
//!    splitters, displacement, loss) and the single-mode purity criteria.
//! 4. [`herald`]: Fock amplitudes of Gaussian states, photon-number heralding,
//!    photon subtraction and the experimental imperfection model.
//! 5. [`analysis`]: Wigner functions, cat-state fidelity, quadrature
//!    marginals, simulated homodyne records, PCA mode estimation and
//!    maximum-likelihood tomography.
//! 6. [`scenario`]: JSON scenario files and the end-to-end runners used by
//!    the `qawg` binary.
//!
//! Conventions used everywhere: `x = (a + a†)/√2`, vacuum quadrature
//! variance 1/2, vacuum Wigner value `W(0,0) = 1/π`, and
//! `f̃(ω) = (2π)^(-1/2) ∫ f(t) e^(-iωt) dt` with the carrier at `ω = 0`.

pub mod analysis;
pub mod error;
pub mod filters;
pub mod gaussian;
pub mod herald;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod scenario;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Phase-space convention stamped into every exported file.
pub const CONVENTION: &str =
    "x=(a+a^dag)/sqrt(2); vacuum quadrature variance 1/2; W_vac(0,0)=1/pi; f~(w)=(2pi)^-1/2 int f(t) exp(-iwt) dt";

/// Artifact version stamped into every exported file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
