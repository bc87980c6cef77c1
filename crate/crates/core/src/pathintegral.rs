//! Euclidean time slicing of the free particle in the plane, one angular
//! mode at a time.
//!
//! A wavefunction `ψ(r, φ) = f(r) cos(mφ)` is advanced by one slice of
//! length `ε` with one of three kernels:
//!
//! * `ExactCartesian`: the heat kernel `(2πħε)^{-1} exp(−|x − x'|²/(2ħε))`
//!   with the angle integrated out, giving the radial kernel
//!   `(2πħε)^{-1} e^{−(r−r')²/(2ħε)} A_m(rr'/(ħε))` with
//!   `A_m(z) = ∫ e^{−z(1−cos θ)} cos mθ dθ` over one period;
//! * `NaivePolar`: the polar action `½((Δr)² + r̄²(Δφ)²)/ε` with the
//!   measure `r dr dφ` and the normalization `r̄/(2πħε √(rr'))` that makes
//!   the slice symmetric in `r dr`;
//! * `CorrectedPolar`: the naive slice followed by `exp(εħ/(8r²))`.
//!
//! Expanding the naive slice to first order in `ε` gives
//! `ψ − (ε/ħ)(H + ħ²/(8r²))ψ`: the factor `√(r'/r)` left after the angular
//! Gaussian contributes `−ħ/(8r²)` per unit `ε`, which the exact kernel
//! cancels through the `1/(8z)` term of its large-`z` expansion.
//! [`effective_hamiltonian_action`] measures `H_eff ψ = ħ(ψ − Sψ)/ε`
//! extrapolated to `ε → 0`, and [`extract_effective_potential`] divides the
//! difference between two prescriptions by `ψ`.
//!
//! Imaginary time keeps every integral positive and non-oscillatory; the
//! first-order term, and so the effective potential, is the same as for the
//! real-time kernel since both come from the same short-time expansion with
//! `it` replaced by `ε`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};
use crate::geometry::ModelParams;
use crate::quadrature::{gauss_legendre, Rule};

/// Uniform radial grid with trapezoid weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self { r_min: 0.1, r_max: 8.0, nodes: 2048 }
    }
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, nodes: usize) -> Result<Self> {
        let g = Self { r_min, r_max, nodes };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(RotorError::Config(format!("radial range [{}, {}] is invalid", self.r_min, self.r_max)));
        }
        if self.nodes < 16 {
            return Err(RotorError::Config(format!("radial grid needs at least 16 nodes, got {}", self.nodes)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.nodes - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.nodes).map(|j| self.r_min + j as f64 * h).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.nodes).map(|j| if j == 0 || j + 1 == self.nodes { 0.5 * h } else { h }).collect()
    }

    /// Index of the node nearest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        (((r - self.r_min) / self.spacing()).round().max(0.0) as usize).min(self.nodes - 1)
    }
}

/// Radial profile `f` of `ψ(r, φ) = f(r) cos(mφ)` on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialWavefunction {
    pub m: usize,
    pub grid: RadialGrid,
    pub samples: Vec<f64>,
}

/// Largest boundary value allowed, relative to the peak.
pub const TAIL_TOL: f64 = 1e-12;

impl RadialWavefunction {
    /// Samples must be finite and negligible (relative to the peak) at the
    /// ends of the grid. A grid starting at `r = 0` has no inner boundary,
    /// so only the outer end is checked there.
    pub fn new(m: usize, grid: RadialGrid, samples: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.nodes {
            return Err(RotorError::DimensionMismatch { expected: grid.nodes, got: samples.len() });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(RotorError::Precondition("wavefunction samples must be finite".into()));
        }
        let peak = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let inner = if grid.r_min > 0.0 { samples[0].abs() } else { 0.0 };
        let tail = inner.max(samples[samples.len() - 1].abs());
        if tail > TAIL_TOL * peak {
            return Err(RotorError::Precondition(format!(
                "wavefunction is not confined to the grid: boundary/peak = {:e}",
                tail / peak
            )));
        }
        Ok(Self { m, grid, samples })
    }

    pub fn from_fn(m: usize, grid: RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let s = grid.points().into_iter().map(f).collect();
        Self::new(m, grid, s)
    }

    /// `∫ |ψ|² r dr dφ`.
    pub fn norm_sq(&self) -> f64 {
        let ang = if self.m == 0 { 2.0 * PI } else { PI };
        let r = self.grid.points();
        ang * self.grid.weights().iter().zip(&r).zip(&self.samples).map(|((w, r), f)| w * r * f * f).sum::<f64>()
    }
}

/// Time-slicing rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prescription {
    #[serde(alias = "exact")]
    ExactCartesian,
    #[serde(alias = "naive")]
    NaivePolar,
    #[serde(alias = "corrected")]
    CorrectedPolar,
}

/// Where `r̄` is taken in the angular part of the naive action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceOrdering {
    /// `r̄ = (r + r')/2`.
    #[default]
    Midpoint,
    /// `r̄ = r'`, the source point.
    PrePoint,
    /// `r̄ = r`, the target point.
    PostPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceKernelSpec {
    /// Euclidean time step.
    pub eps: f64,
    pub prescription: Prescription,
    /// Starting node count of the angular quadrature (doubled until stable).
    pub resolution: usize,
    #[serde(default)]
    pub ordering: SliceOrdering,
}

/// Relative stability demanded from the angular quadrature.
pub const ANGULAR_TOL: f64 = 1e-10;
const MAX_ANGULAR_NODES: usize = 1024;
/// Gaussian factors below `e^{−CUTOFF}` are dropped.
const CUTOFF: f64 = 50.0;

impl SliceKernelSpec {
    pub fn new(eps: f64, prescription: Prescription) -> Self {
        Self { eps, prescription, resolution: 64, ordering: SliceOrdering::Midpoint }
    }

    pub fn validate(&self, grid: &RadialGrid, p: &ModelParams) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(RotorError::Config(format!("time step {} must be positive", self.eps)));
        }
        if self.resolution < 64 {
            return Err(RotorError::Config(format!("angular resolution {} must be at least 64", self.resolution)));
        }
        let width = (p.hbar() * self.eps).sqrt();
        let limit = (grid.r_max - grid.r_min) / 8.0;
        if width >= limit {
            return Err(RotorError::KernelWidth { width, limit });
        }
        if self.prescription != Prescription::ExactCartesian && grid.r_min <= 0.0 {
            return Err(RotorError::Config("polar kernels need r_min > 0".into()));
        }
        Ok(())
    }
}

fn legendre_rules() -> &'static Vec<Rule> {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(|| {
        let mut out = Vec::new();
        let mut n = 64;
        while n <= MAX_ANGULAR_NODES {
            out.push(gauss_legendre(n).expect("n >= 1"));
            n *= 2;
        }
        out
    })
}

/// `2 ∫_0^{θ_max} e(θ) c(θ) dθ` for an even integrand split into a positive
/// envelope `e` and a bounded factor `c`, doubling the Gauss rule from
/// `start` nodes until two successive values agree to [`ANGULAR_TOL`]
/// relative to the envelope integral.
fn even_angular_integral(
    env: impl Fn(f64) -> f64,
    c: impl Fn(f64) -> f64,
    theta_max: f64,
    start: usize,
) -> Result<f64> {
    let rules = legendre_rules();
    let h = 0.5 * theta_max;
    let eval = |rule: &Rule| {
        rule.nodes.iter().zip(&rule.weights).fold((0.0, 0.0), |(v, e), (u, w)| {
            let t = h * (1.0 + u);
            let g = w * env(t);
            (v + g * c(t), e + g)
        })
    };
    let first = rules.iter().position(|r| r.len() >= start).unwrap_or(rules.len());
    let mut prev: Option<f64> = None;
    for rule in &rules[first..] {
        let (v, e) = eval(rule);
        let (v, e) = (2.0 * h * v, 2.0 * h * e);
        if let Some(p) = prev {
            if (v - p).abs() <= ANGULAR_TOL * e {
                return Ok(v);
            }
        }
        prev = Some(v);
    }
    Err(RotorError::QuadratureNonConvergence { nodes: MAX_ANGULAR_NODES })
}

/// `A_m(z) = ∫_{−π}^{π} e^{−z(1−cos θ)} cos mθ dθ`.
pub fn exact_angular_factor(m: usize, z: f64, start: usize) -> Result<f64> {
    let theta_max = if z > CUTOFF / 2.0 { (1.0 - CUTOFF / z).acos() } else { PI };
    even_angular_integral(|t| (-z * (1.0 - t.cos())).exp(), |t| (m as f64 * t).cos(), theta_max, start)
}

/// `B_m = ∫_{−π}^{π} e^{−r̄²θ²/(2ħε)} cos mθ dθ`.
pub fn naive_angular_factor(m: usize, rbar: f64, hbar_eps: f64, start: usize) -> Result<f64> {
    let a = rbar * rbar / (2.0 * hbar_eps);
    let theta_max = (CUTOFF / a).sqrt().min(PI);
    even_angular_integral(|t| (-a * t * t).exp(), |t| (m as f64 * t).cos(), theta_max, start)
}

/// Banded radial kernel of one slice, including quadrature weights.
#[derive(Debug, Clone)]
pub struct SliceKernel {
    pub grid: RadialGrid,
    pub m: usize,
    pub spec: SliceKernelSpec,
    rows: Vec<(usize, Vec<f64>)>,
    post: Option<Vec<f64>>,
}

impl SliceKernel {
    pub fn build(grid: &RadialGrid, m: usize, spec: &SliceKernelSpec, p: &ModelParams) -> Result<Self> {
        spec.validate(grid, p)?;
        let he = p.hbar() * spec.eps;
        let r = grid.points();
        let w = grid.weights();
        let h = grid.spacing();
        let band = ((2.0 * CUTOFF * he).sqrt() / h).ceil() as usize;
        let n = grid.nodes;
        // the naive factor depends on r̄ only, which takes few distinct values
        let rbar_of = |i: usize, j: usize| match spec.ordering {
            SliceOrdering::Midpoint => (i + j, 0.5 * (r[i] + r[j])),
            SliceOrdering::PrePoint => (2 * j, r[j]),
            SliceOrdering::PostPoint => (2 * i, r[i]),
        };
        let naive: Vec<f64> = if spec.prescription == Prescription::ExactCartesian {
            Vec::new()
        } else {
            let mut table = vec![0.0; 2 * n];
            for i in 0..n {
                for j in [i, (i + 1).min(n - 1)] {
                    let (key, rbar) = rbar_of(i, j);
                    table[key] = naive_angular_factor(m, rbar, he, spec.resolution)?;
                }
            }
            table
        };
        // the exact base kernel is symmetric: integrate each pair once
        let mut upper: Vec<Vec<f64>> = Vec::new();
        if spec.prescription == Prescription::ExactCartesian {
            upper.reserve(n);
            for i in 0..n {
                let hi = (i + band).min(n - 1);
                let mut vals = Vec::with_capacity(hi - i + 1);
                for j in i..=hi {
                    let dr = r[i] - r[j];
                    let gauss = (-dr * dr / (2.0 * he)).exp();
                    vals.push(gauss * exact_angular_factor(m, r[i] * r[j] / he, spec.resolution)? / (2.0 * PI * he));
                }
                upper.push(vals);
            }
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let lo = i.saturating_sub(band);
            let hi = (i + band).min(n - 1);
            let vals = (lo..=hi)
                .map(|j| {
                    let k = if spec.prescription == Prescription::ExactCartesian {
                        let (a, b) = if i <= j { (i, j) } else { (j, i) };
                        upper[a][b - a]
                    } else {
                        let dr = r[i] - r[j];
                        let (key, rbar) = rbar_of(i, j);
                        (-dr * dr / (2.0 * he)).exp() * naive[key] * rbar / (2.0 * PI * he * (r[i] * r[j]).sqrt())
                    };
                    k * w[j] * r[j]
                })
                .collect();
            rows.push((lo, vals));
        }
        let post = (spec.prescription == Prescription::CorrectedPolar)
            .then(|| r.iter().map(|ri| (spec.eps * p.hbar() / (8.0 * ri * ri)).exp()).collect());
        Ok(Self { grid: grid.clone(), m, spec: *spec, rows, post })
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> =
            self.rows.iter().map(|(lo, vals)| vals.iter().zip(&f[*lo..]).map(|(k, v)| k * v).sum()).collect();
        if let Some(post) = &self.post {
            out.iter_mut().zip(post).for_each(|(o, c)| *o *= c);
        }
        out
    }
}

/// One Euclidean slice of `ψ`.
pub fn slice_step(psi: &RadialWavefunction, spec: &SliceKernelSpec, p: &ModelParams) -> Result<RadialWavefunction> {
    let k = SliceKernel::build(&psi.grid, psi.m, spec, p)?;
    Ok(RadialWavefunction { m: psi.m, grid: psi.grid.clone(), samples: k.apply(&psi.samples) })
}

/// Polynomial extrapolation of `(x_k, y_k)` to `x = 0` (Neville).
pub fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut t = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (a, b) = (x[i], x[i + level]);
            t[i] = (b * t[i] - a * t[i + 1]) / (b - a);
        }
    }
    t[0]
}

/// Extrapolated `H_eff ψ` on the radial grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveAction {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    /// True when the sup-norm change between successive `ε` did not shrink.
    pub flagged: bool,
}

fn check_eps_list(eps: &[f64]) -> Result<()> {
    if eps.len() < 3 {
        return Err(RotorError::Config("the time-step list needs at least three values".into()));
    }
    let q = eps[1] / eps[0];
    let geometric = eps.windows(2).all(|w| ((w[1] / w[0]) - q).abs() <= 1e-9 * q.abs());
    if !(geometric && eps.iter().all(|e| *e > 0.0) && q != 1.0) {
        return Err(RotorError::Config(format!("time steps {eps:?} must form a positive geometric sequence")));
    }
    Ok(())
}

/// `ħ(ψ − S_ε ψ)/ε` for every `ε`, extrapolated to `ε → 0`.
pub fn effective_hamiltonian_action(
    psi: &RadialWavefunction,
    prescription: Prescription,
    eps: &[f64],
    p: &ModelParams,
) -> Result<EffectiveAction> {
    let kernels = eps
        .iter()
        .map(|&e| SliceKernel::build(&psi.grid, psi.m, &SliceKernelSpec::new(e, prescription), p))
        .collect::<Result<Vec<_>>>()?;
    effective_action_with(psi, &kernels, p)
}

/// As [`effective_hamiltonian_action`] with prebuilt kernels (one per `ε`).
pub fn effective_action_with(
    psi: &RadialWavefunction,
    kernels: &[SliceKernel],
    p: &ModelParams,
) -> Result<EffectiveAction> {
    let eps: Vec<f64> = kernels.iter().map(|k| k.spec.eps).collect();
    check_eps_list(&eps)?;
    if kernels.iter().any(|k| k.m != psi.m || k.grid != psi.grid) {
        return Err(RotorError::Precondition("kernels do not match the wavefunction's mode or grid".into()));
    }
    let series: Vec<Vec<f64>> = kernels
        .iter()
        .map(|k| {
            let s = k.apply(&psi.samples);
            psi.samples.iter().zip(&s).map(|(a, b)| p.hbar() * (a - b) / k.spec.eps).collect()
        })
        .collect();
    let n = psi.samples.len();
    // successive differences must shrink in the sup norm
    let diffs: Vec<f64> =
        series.windows(2).map(|w| w[0].iter().zip(&w[1]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))).collect();
    let flagged = diffs.windows(2).any(|d| d[1] > d[0]);
    let values = (0..n)
        .map(|i| {
            let y: Vec<f64> = series.iter().map(|s| s[i]).collect();
            neville_at_zero(&eps, &y)
        })
        .collect();
    Ok(EffectiveAction { r: psi.grid.points(), values, flagged })
}

/// One row of the effective-potential table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSample {
    pub r: f64,
    pub delta_v: f64,
    /// `ħ²/(8r²)`.
    pub predicted: f64,
    pub relative_error: f64,
    /// `(max − min)/|mean|` across the family.
    pub spread: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialTable {
    pub prescription: Prescription,
    pub samples: Vec<PotentialSample>,
    /// Radii dropped because every family member was too small there.
    pub skipped: Vec<f64>,
    /// Mean of `8r²ΔV/ħ²` over the samples.
    pub fit: f64,
    /// Largest `|8r²ΔV/ħ² − fit|`.
    pub fit_spread: f64,
    pub flagged: bool,
}

/// Members whose `|ψ(r)|` is below this fraction of their peak are skipped at `r`.
pub const SKIP_FRACTION: f64 = 1e-3;

/// `ΔV(r) = [(H_prescription − H_exact)ψ](r)/ψ(r)` averaged over `family`.
pub fn extract_effective_potential(
    family: &[RadialWavefunction],
    r_samples: &[f64],
    prescription: Prescription,
    eps: &[f64],
    p: &ModelParams,
) -> Result<PotentialTable> {
    Ok(extract_effective_potentials(family, r_samples, &[prescription], eps, p)?.remove(0))
}

/// [`extract_effective_potential`] for several prescriptions, sharing the
/// exact reference.
pub fn extract_effective_potentials(
    family: &[RadialWavefunction],
    r_samples: &[f64],
    prescriptions: &[Prescription],
    eps: &[f64],
    p: &ModelParams,
) -> Result<Vec<PotentialTable>> {
    if family.len() < 3 {
        return Err(RotorError::Config("the test family needs at least three wavefunctions".into()));
    }
    check_eps_list(eps)?;
    let build = |psi: &RadialWavefunction, pr| {
        eps.iter()
            .map(|&e| SliceKernel::build(&psi.grid, psi.m, &SliceKernelSpec::new(e, pr), p))
            .collect::<Result<Vec<_>>>()
    };
    // kernels per angular mode, exact first
    let mut kernels: Vec<(usize, Vec<Vec<SliceKernel>>)> = Vec::new();
    for psi in family {
        if !kernels.iter().any(|(m, _)| *m == psi.m) {
            let mut set = vec![build(psi, Prescription::ExactCartesian)?];
            for &pr in prescriptions {
                set.push(build(psi, pr)?);
            }
            kernels.push((psi.m, set));
        }
    }
    let mut actions = Vec::new();
    for psi in family {
        let (_, set) = kernels.iter().find(|(m, _)| *m == psi.m).expect("built above");
        actions.push(set.iter().map(|k| effective_action_with(psi, k, p)).collect::<Result<Vec<_>>>()?);
    }
    let hbar2 = p.hbar() * p.hbar();
    let mut tables = Vec::new();
    for (slot, &prescription) in prescriptions.iter().enumerate() {
        let flagged = actions.iter().any(|a| a[0].flagged || a[slot + 1].flagged);
        let mut samples = Vec::new();
        let mut skipped = Vec::new();
        for &r in r_samples {
            let mut vals = Vec::new();
            for (psi, a) in family.iter().zip(&actions) {
                let i = psi.grid.nearest(r);
                let peak = psi.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if psi.samples[i].abs() >= SKIP_FRACTION * peak {
                    vals.push((psi.grid.points()[i], (a[slot + 1].values[i] - a[0].values[i]) / psi.samples[i]));
                }
            }
            if vals.is_empty() {
                skipped.push(r);
                continue;
            }
            let rr = vals[0].0;
            let dv: Vec<f64> = vals.iter().map(|v| v.1).collect();
            let mean = dv.iter().sum::<f64>() / dv.len() as f64;
            let (lo, hi) = dv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
            let predicted = hbar2 / (8.0 * rr * rr);
            samples.push(PotentialSample {
                r: rr,
                delta_v: mean,
                predicted,
                relative_error: (mean - predicted).abs() / predicted,
                spread: (hi - lo) / mean.abs().max(f64::MIN_POSITIVE),
                count: dv.len(),
            });
        }
        let ratios: Vec<f64> = samples.iter().map(|s| 8.0 * s.r * s.r * s.delta_v / hbar2).collect();
        let fit = if ratios.is_empty() { f64::NAN } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
        let fit_spread = ratios.iter().fold(0.0f64, |m, v| m.max((v - fit).abs()));
        tables.push(PotentialTable { prescription, samples, skipped, fit, fit_spread, flagged });
    }
    Ok(tables)
}

impl PotentialTable {
    /// Columns `r, delta_v, predicted, relative_error`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "delta_v", "predicted", "relative_error"]).expect("in-memory write");
        for s in &self.samples {
            w.write_record([s.r, s.delta_v, s.predicted, s.relative_error].map(|v| format!("{v:e}")))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

/// Gaussians `exp(−(r − c)²/(2s²))` switched off near the origin by
/// `exp(−(b/r)⁴)`: broad over `[0.5, 3]` and negligible at the default grid
/// ends.
pub fn bump_family(m: usize, grid: &RadialGrid) -> Result<Vec<RadialWavefunction>> {
    [(0.35, 1.75, 0.8), (0.3, 1.6, 0.75), (0.4, 1.9, 0.8)]
        .iter()
        .map(|&(b, c, s)| {
            RadialWavefunction::from_fn(m, grid.clone(), |r: f64| {
                (-(b / r).powi(4) - (r - c).powi(2) / (2.0 * s * s)).exp()
            })
        })
        .collect()
}

/// Radii spaced by `step` over `[a, b]`.
pub fn sample_radii(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|k| a + k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> ModelParams {
        ModelParams::unit(2).unwrap()
    }

    /// Far enough from both grid ends that repeated slices lose nothing.
    fn narrow_bump(m: usize, grid: &RadialGrid) -> RadialWavefunction {
        RadialWavefunction::from_fn(m, grid.clone(), |r| (-(r - 2.0).powi(2) / (2.0 * 0.0625)).exp()).unwrap()
    }

    #[test]
    fn exact_angular_factor_matches_full_quadrature() {
        // A_m against a dense periodic trapezoid over the full circle
        for (m, z) in [(0, 0.0), (0, 3.0), (1, 40.0), (2, 900.0), (1, 5e4)] {
            let n = 20000;
            let h = 2.0 * PI / n as f64;
            let brute: f64 =
                (0..n).map(|k| k as f64 * h).map(|t| (-z * (1.0 - t.cos())).exp() * (m as f64 * t).cos() * h).sum();
            let a = exact_angular_factor(m, z, 64).unwrap();
            assert!((a - brute).abs() < 1e-10 * brute.abs().max(1e-300), "m={m} z={z}: {a} vs {brute}");
        }
    }

    #[test]
    fn radial_reduction_matches_plane_quadrature() {
        // one slice of f(r) cos φ evaluated directly as a 2D integral on a square grid
        let p = plane();
        let eps = 0.02;
        let grid = RadialGrid::new(0.0, 6.0, 1201).unwrap();
        let f = |r: f64| r * (-(r - 1.5f64).powi(2) * 4.0).exp();
        let psi = RadialWavefunction::from_fn(1, grid.clone(), f).unwrap();
        let out = slice_step(&psi, &SliceKernelSpec::new(eps, Prescription::ExactCartesian), &p).unwrap();
        let target = 1.2;
        let i = grid.nearest(target);
        let r0 = grid.points()[i];
        let n = 600;
        let h = 12.0 / n as f64;
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                let (x, y) = (-6.0 + a as f64 * h, -6.0 + b as f64 * h);
                let rr = x.hypot(y);
                let d2 = (x - r0).powi(2) + y * y;
                acc += h * h * (-d2 / (2.0 * eps)).exp() / (2.0 * PI * eps) * f(rr) * x / rr.max(1e-300);
            }
        }
        assert!((out.samples[i] - acc).abs() < 1e-8, "{} vs {acc}", out.samples[i]);
    }

    #[test]
    fn gaussian_heat_evolution() {
        let p = plane();
        let grid = RadialGrid::new(0.0, 8.0, 2049).unwrap();
        let s2 = 0.8f64;
        let psi = RadialWavefunction::from_fn(0, grid.clone(), |r| (-r * r / (2.0 * s2)).exp()).unwrap();
        let eps = 4e-3;
        let out = slice_step(&psi, &SliceKernelSpec::new(eps, Prescription::ExactCartesian), &p).unwrap();
        let t = s2 + eps;
        for (r, v) in grid.points().iter().zip(&out.samples) {
            if *r >= 0.5 && *r <= 5.0 {
                assert!((v - s2 / t * (-r * r / (2.0 * t)).exp()).abs() < 1e-8, "r = {r}");
            }
        }
    }

    #[test]
    fn exact_slices_compose() {
        let p = plane();
        let grid = RadialGrid::default();
        let psi = &narrow_bump(0, &grid);
        let eps = 4e-3;
        let half = SliceKernelSpec::new(eps / 2.0, Prescription::ExactCartesian);
        let twice = slice_step(&slice_step(psi, &half, &p).unwrap(), &half, &p).unwrap();
        let once = slice_step(psi, &SliceKernelSpec::new(eps, Prescription::ExactCartesian), &p).unwrap();
        let dev = twice.samples.iter().zip(&once.samples).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 1e-8, "{dev}");
        assert!(once.norm_sq() <= psi.norm_sq());
    }

    #[test]
    fn exact_action_is_the_radial_laplacian() {
        use crate::expr::Expr;
        let p = ModelParams::new(2, 1.0, 0.7).unwrap();
        let grid = RadialGrid::default();
        let r = Expr::var(0);
        let f = (-(r.clone() - 4.0).powi(2) * 2.0).exp();
        let (f1, f2) = (f.diff(0), f.diff(0).diff(0));
        for m in [0usize, 1] {
            let psi = RadialWavefunction::from_fn(m, grid.clone(), |x| f.eval(&[x])).unwrap();
            let act =
                effective_hamiltonian_action(&psi, Prescription::ExactCartesian, &[4e-3, 2e-3, 1e-3], &p).unwrap();
            let mm = (m * m) as f64;
            let want: Vec<f64> = act
                .r
                .iter()
                .map(|&x| {
                    -0.5 * p.hbar() * p.hbar() * (f2.eval(&[x]) + f1.eval(&[x]) / x - mm * f.eval(&[x]) / (x * x))
                })
                .collect();
            let scale = want.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let dev = act.values.iter().zip(&want).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            assert!(dev < 1e-5 * scale, "m={m}: {dev:e} vs scale {scale}");
            assert!(!act.flagged);
        }
    }

    #[test]
    fn naive_slices_break_the_semigroup_at_second_order() {
        let p = plane();
        let grid = RadialGrid::default();
        let defect = |m: usize, eps: f64| {
            let psi = narrow_bump(m, &grid);
            let half = SliceKernelSpec::new(eps / 2.0, Prescription::NaivePolar);
            let twice = slice_step(&slice_step(&psi, &half, &p).unwrap(), &half, &p).unwrap();
            let once = slice_step(&psi, &SliceKernelSpec::new(eps, Prescription::NaivePolar), &p).unwrap();
            twice.samples.iter().zip(&once.samples).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let (d1, d2, d3) = (defect(1, 8e-3), defect(1, 4e-3), defect(1, 2e-3));
        for ratio in [d1 / d2, d2 / d3] {
            let order = ratio.log2();
            assert!((order - 2.0).abs() < 0.2, "order {order}");
        }
        // for m = 0 the naive slice is √r-conjugated 1D heat flow, an exact semigroup
        assert!(defect(0, 8e-3) < 1e-11);
    }

    #[test]
    fn neville_removes_polynomial_terms() {
        let x = [0.4, 0.2, 0.1];
        let y: Vec<f64> = x.iter().map(|e| 3.0 + 2.0 * e - 5.0 * e * e).collect();
        assert!((neville_at_zero(&x, &y) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn preconditions() {
        let p = plane();
        let grid = RadialGrid::default();
        let wide = SliceKernelSpec::new(10.0, Prescription::NaivePolar);
        assert!(matches!(wide.validate(&grid, &p), Err(RotorError::KernelWidth { .. })));
        let coarse = SliceKernelSpec { resolution: 32, ..SliceKernelSpec::new(1e-3, Prescription::NaivePolar) };
        assert!(coarse.validate(&grid, &p).is_err());
        assert!(RadialWavefunction::from_fn(0, grid.clone(), |r| (-r).exp()).is_err());
        assert!(check_eps_list(&[4e-3, 2e-3]).is_err());
        assert!(check_eps_list(&[4e-3, 2e-3, 1.5e-3]).is_err());
    }
}
