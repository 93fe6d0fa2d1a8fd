use nalgebra::{DMatrix, SymmetricEigen};

use super::records::HomodyneRecord;
use crate::modes::{ModeFunction, TimeGrid};
use crate::{Error, Result, C64};

pub const MIN_PCA_RECORDS: usize = 100;
const RANK_FLOOR: f64 = 1e-6;

/// Principal components of heralded traces, eigenvalues in vacuum units.
#[derive(Debug, Clone)]
pub struct PcaResult {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<ModeFunction>,
}

impl PcaResult {
    /// `λ₁ - λ₂` over the spread of the remaining eigenvalues.
    pub fn gap_ratio(&self) -> f64 {
        let l = &self.eigenvalues;
        if l.len() < 3 {
            return f64::INFINITY;
        }
        let bulk = &l[1..];
        let spread = bulk[0] - bulk[bulk.len() - 1];
        (l[0] - l[1]) / spread.max(1e-300)
    }

    /// Whether the first component stands out of the vacuum bulk.
    pub fn has_dominant_mode(&self) -> bool {
        self.eigenvalues.len() >= 2 && self.gap_ratio() > 5.0 && self.eigenvalues[0] > 1.2
    }
}

fn second_moments(records: &[&HomodyneRecord], n: usize) -> Result<DMatrix<f64>> {
    let mut c = DMatrix::<f64>::zeros(n, n);
    for r in records {
        if r.trace.len() != n {
            return Err(Error::GridMismatch);
        }
        let x = nalgebra::DVectorView::from_slice(&r.trace, n);
        c.syger(1.0, &x, &x, 1.0);
    }
    c.fill_upper_triangle_with_lower_triangle();
    Ok(c / records.len() as f64)
}

/// PCA of the trace autocorrelation, normalized per component by the
/// vacuum-reference variance along the same direction.
pub fn pca_estimate(
    records: &[&HomodyneRecord],
    vacuum_refs: &[&HomodyneRecord],
    grid: &TimeGrid,
) -> Result<PcaResult> {
    if records.len() < MIN_PCA_RECORDS || vacuum_refs.len() < MIN_PCA_RECORDS {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least {MIN_PCA_RECORDS} records and vacuum references, got {} and {}",
            records.len(),
            vacuum_refs.len()
        )));
    }
    let n = grid.n_samples;
    let c = second_moments(records, n)?;
    let cv = second_moments(vacuum_refs, n)?;
    let eig = SymmetricEigen::new(c);
    let vmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut comps: Vec<(f64, Vec<f64>)> = Vec::new();
    for k in 0..n {
        let v = eig.eigenvalues[k];
        if v < RANK_FLOOR * vmax {
            continue;
        }
        let e = eig.eigenvectors.column(k);
        let vac = (e.transpose() * &cv * e)[(0, 0)];
        if !(vac > 0.0) {
            continue;
        }
        comps.push((v / vac, e.iter().cloned().collect()));
    }
    comps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sdt = grid.dt.sqrt();
    let mut eigenvalues = Vec::with_capacity(comps.len());
    let mut eigenfunctions = Vec::with_capacity(comps.len());
    for (i, (l, mut e)) in comps.into_iter().enumerate() {
        if leading_lobe(&e) < 0.0 {
            e.iter_mut().for_each(|v| *v = -*v);
        }
        eigenvalues.push(l);
        eigenfunctions.push(ModeFunction::new(
            *grid,
            e.iter().map(|v| C64::new(v / sdt, 0.0)).collect(),
            format!("pca_{}", i + 1),
        )?);
    }
    Ok(PcaResult {
        eigenvalues,
        eigenfunctions,
    })
}

/// First sample reaching half the peak magnitude.
fn leading_lobe(e: &[f64]) -> f64 {
    let peak = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    e.iter().cloned().find(|v| v.abs() >= 0.5 * peak).unwrap_or(0.0)
}

/// Average of first eigenfunctions, each sign-aligned to the first.
pub fn estimate_waveform(per_phase: &[PcaResult]) -> Result<ModeFunction> {
    if per_phase.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "waveform averaging needs at least 2 phases, got {}",
            per_phase.len()
        )));
    }
    let firsts = per_phase
        .iter()
        .map(|p| {
            p.eigenfunctions
                .first()
                .ok_or(Error::InsufficientData("empty PCA result".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = firsts[0];
    let mut sum = vec![C64::new(0.0, 0.0); reference.grid.n_samples];
    for f in &firsts {
        if !f.grid.same_as(&reference.grid) {
            return Err(Error::GridMismatch);
        }
        let overlap: f64 = reference
            .values
            .iter()
            .zip(&f.values)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        let s = if overlap < 0.0 { -1.0 } else { 1.0 };
        for (acc, v) in sum.iter_mut().zip(&f.values) {
            *acc += v * s;
        }
    }
    ModeFunction::new(reference.grid, sum, "pca_average")?.normalized()
}
