//! Rotor spectra from discretized angular Hamiltonians.
//!
//! [`SpectralGrid`] places Gauss nodes in `cos φ_k` for every polar angle
//! and a uniform grid in the azimuth; [`assemble`] builds the
//! [`GridOperator`]; [`compute_spectrum`] returns the lowest eigenvalues
//! either block by block, from the assembled tensor matrix, or by Lanczos on
//! the matrix-free tensor operator. [`reference_spectrum`] gives the closed
//! form `ħ² l(l+D−2)/(2R²)` with the harmonic multiplicities.

mod assemble;
mod eigen;
mod extrapolate;
mod grid;
mod reference;

use serde::{Deserialize, Serialize};

pub use assemble::{
    assemble, fourier_basis, fourier_second_derivative, orthonormal_polynomials, sector_block, GridOperator, Sector,
};
pub use eigen::{dense_symmetric, lanczos_smallest, EigenPairs, LanczosOptions};
pub use extrapolate::{richardson, Extrapolated, ExtrapolationStatus, CONVERGED_TOL};
pub use grid::{PolarAxis, SpectralGrid, SUPPORTED_DIMS};
pub use reference::{harmonic_dimension, reference_spectrum, Level, MAX_LEVEL};

use crate::error::{Result, RotorError};
use crate::geometry::ModelParams;

/// Eigensolver route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Dense diagonalization of each separable block, skipping blocks whose
    /// lower bound exceeds the wanted eigenvalues.
    Dense,
    /// Dense diagonalization of the fully assembled tensor matrix.
    DenseTensor,
    /// Lanczos on the matrix-free tensor operator.
    Iterative(LanczosOptions),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::DenseTensor => "dense-tensor",
            Method::Iterative(_) => "iterative",
        }
    }
}

/// Eigenvalues within `tol` of their neighbour, grouped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub params: ModelParams,
    /// Node counts per axis, polar axes first.
    pub resolution: Vec<usize>,
    pub method: String,
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub residuals: Vec<f64>,
}

/// Default clustering tolerance, `10⁻⁶ ħ²/R²`.
pub fn default_cluster_tol(p: &ModelParams) -> f64 {
    1e-6 * p.hbar() * p.hbar() / (p.radius() * p.radius())
}

/// Group sorted eigenvalues: a value joins the current cluster when it lies
/// within `tol` of the previous one.
pub fn cluster(values: &[f64], tol: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 0..=values.len() {
        let split = i == values.len() || (i > start && values[i] - values[i - 1] > tol);
        if split && i > start {
            let group = &values[start..i];
            let mean = group.iter().sum::<f64>() / group.len() as f64;
            out.push(Cluster { value: mean, multiplicity: group.len(), spread: group[group.len() - 1] - group[0] });
            start = i;
        }
    }
    out
}

/// The `k` lowest eigenvalues of `op`.
pub fn compute_spectrum(op: &GridOperator, k: usize, method: &Method) -> Result<SpectrumResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(RotorError::Config(format!("cannot compute {k} eigenvalues of a {n}-point grid")));
    }
    let e = op.energy_unit();
    let p = op.grid().params;
    let tol = default_cluster_tol(&p);
    if !matches!(method, Method::Dense) {
        op.prepare()?;
    }
    let (values, residuals) = match method {
        Method::Dense => sector_spectrum(op, k, tol / e)?,
        Method::DenseTensor => {
            let pairs = dense_symmetric(&op.assemble_dense());
            (pairs.values[..k].to_vec(), pairs.residuals[..k].to_vec())
        }
        Method::Iterative(opts) => {
            let pairs = lanczos_smallest(|v| op.apply_symmetric(v), n, k, opts)?;
            (pairs.values, pairs.residuals)
        }
    };
    let eigenvalues: Vec<f64> = values.iter().map(|v| v * e).collect();
    Ok(SpectrumResult {
        params: p,
        resolution: op.grid().shape(),
        method: method.name().into(),
        clusters: cluster(&eigenvalues, tol),
        eigenvalues,
        residuals: residuals.iter().map(|r| r * e).collect(),
    })
}

fn sector_spectrum(op: &GridOperator, k: usize, margin: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut sectors = op.sectors();
    sectors.sort_by(|a, b| a.bound.total_cmp(&b.bound));
    let mut found: Vec<(f64, f64)> = Vec::new();
    for s in &sectors {
        if found.len() >= k && s.bound > found[k - 1].0 + margin {
            break;
        }
        let pairs = dense_symmetric(&op.sector_matrix(s)?);
        for (v, r) in pairs.values.iter().zip(&pairs.residuals) {
            for _ in 0..s.multiplicity {
                found.push((*v, *r));
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    found.truncate(k);
    Ok(found.into_iter().unzip())
}

/// Outcome of comparing one reference level with the computed clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelMatch {
    pub l: usize,
    pub expected: f64,
    pub expected_multiplicity: usize,
    pub found: Option<f64>,
    pub found_multiplicity: usize,
    pub relative_error: f64,
    pub pass: bool,
}

/// Match the `i`-th cluster against the `i`-th reference level. Relative
/// errors use `ħ²/(2R²)` as a floor so the zero level is compared absolutely.
pub fn compare_with_reference(
    clusters: &[Cluster],
    levels: &[Level],
    rel_tol: f64,
    p: &ModelParams,
) -> Vec<LevelMatch> {
    levels
        .iter()
        .enumerate()
        .map(|(i, lv)| {
            let c = clusters.get(i);
            let found = c.map(|c| c.value);
            let rel = found.map_or(f64::INFINITY, |v| (v - lv.energy).abs() / lv.energy.abs().max(p.energy_unit()));
            let mult = c.map_or(0, |c| c.multiplicity);
            LevelMatch {
                l: lv.l,
                expected: lv.energy,
                expected_multiplicity: lv.multiplicity,
                found,
                found_multiplicity: mult,
                relative_error: rel,
                pass: rel <= rel_tol && mult == lv.multiplicity,
            }
        })
        .collect()
}

/// Extrapolated eigenvalues across a resolution sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolatedSpectrum {
    pub resolutions: Vec<usize>,
    pub eigenvalues: Vec<Extrapolated>,
    pub clusters: Vec<Cluster>,
    /// True when any eigenvalue converged non-monotonically.
    pub flagged: bool,
}

/// Richardson-extrapolate each eigenvalue index in the grid spacing `1/N`,
/// where `N` is the first axis count. Results must be ordered by increasing
/// resolution and carry the same number of eigenvalues.
pub fn extrapolate(results: &[SpectrumResult]) -> Result<ExtrapolatedSpectrum> {
    if results.len() < 3 {
        return Err(RotorError::Precondition("extrapolation needs at least three resolutions".into()));
    }
    let k = results[0].eigenvalues.len();
    if results.iter().any(|r| r.eigenvalues.len() != k) {
        return Err(RotorError::Precondition("all resolutions must report the same eigenvalue count".into()));
    }
    let h: Vec<f64> = results.iter().map(|r| 1.0 / r.resolution[0] as f64).collect();
    let mut eigenvalues = Vec::with_capacity(k);
    for i in 0..k {
        let v: Vec<f64> = results.iter().map(|r| r.eigenvalues[i]).collect();
        eigenvalues.push(richardson(&h, &v)?);
    }
    let values: Vec<f64> = eigenvalues.iter().map(|e| e.value).collect();
    let tol = default_cluster_tol(&results[0].params);
    Ok(ExtrapolatedSpectrum {
        resolutions: results.iter().map(|r| r.resolution[0]).collect(),
        flagged: eigenvalues.iter().any(|e| e.status == ExtrapolationStatus::NonMonotone),
        clusters: cluster(&values, tol),
        eigenvalues,
    })
}

/// Number of eigenvalues in levels `0..levels`.
pub fn level_count(levels: usize, p: &ModelParams) -> usize {
    (0..levels).map(|l| harmonic_dimension(p.dim(), l)).sum()
}

impl SpectrumResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    /// One row per eigenvalue: `index,eigenvalue,residual,cluster`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "eigenvalue", "residual", "cluster"]).expect("in-memory write");
        let mut cluster_of = Vec::with_capacity(self.eigenvalues.len());
        for (c, cl) in self.clusters.iter().enumerate() {
            cluster_of.extend(std::iter::repeat_n(c, cl.multiplicity));
        }
        for (i, (v, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            w.write_record([i.to_string(), format!("{v:e}"), format!("{r:e}"), cluster_of[i].to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}
