//! Charts and metric algebra for the (D−1)-sphere of radius R in D dimensions.
//!
//! Two charts are used throughout the crate:
//!
//! * the *reduced cartesian* chart `x = (x_1, …, x_{D−1})` on the open upper
//!   hemisphere, with `x_D = √(R² − |x|²)`;
//! * the *hyperspherical* chart with angles `φ_1, …, φ_{D−1}` where
//!   `x_D = r cos φ_1`, `x_{D−k} = r sin φ_1 ⋯ sin φ_k cos φ_{k+1}` and
//!   `x_1 = r sin φ_1 ⋯ sin φ_{D−1}`.
//!
//! Coordinate vectors are zero-based: `x[0]` is `x_1` and `angles[0]` is `φ_1`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};
use crate::expr::Expr;

/// Largest embedding dimension accepted by [`ModelParams`].
pub const MAX_DIM: usize = 10;

/// Clamp tolerance used when recovering angles near the edge of their range.
pub const ANGLE_TOL: f64 = 1e-13;

/// Physical constants and the constraint tolerance. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    dim: usize,
    radius: f64,
    hbar: f64,
    tol_constraint: f64,
}

impl ModelParams {
    pub fn new(dim: usize, radius: f64, hbar: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(RotorError::InvalidParams(format!("D = {dim} must lie in 2..={MAX_DIM}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(RotorError::InvalidParams(format!("R = {radius} must be positive")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(RotorError::InvalidParams(format!("hbar = {hbar} must be positive")));
        }
        Ok(Self { dim, radius, hbar, tol_constraint: 1e-10 })
    }

    /// Unit sphere with ħ = 1.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0, 1.0)
    }

    pub fn with_tol_constraint(self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(RotorError::InvalidParams(format!("tol_constraint = {tol} must be positive")));
        }
        Ok(Self { tol_constraint: tol, ..self })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn tol_constraint(&self) -> f64 {
        self.tol_constraint
    }

    /// Number of intrinsic coordinates, D − 1.
    pub fn chart_dim(&self) -> usize {
        self.dim - 1
    }

    /// The natural energy scale ħ²/(2R²).
    pub fn energy_unit(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.radius * self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    Embedded,
    ReducedCartesian,
    Hyperspherical,
}

/// Coordinates tagged with their chart. Construction validates the chart invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    chart: Chart,
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: Vec<f64>, p: &ModelParams) -> Result<Self> {
        let expected = match chart {
            Chart::Embedded => p.dim,
            _ => p.dim - 1,
        };
        check_len(&coords, expected)?;
        match chart {
            Chart::Embedded => {
                let n2 = norm_sq(&coords);
                let r2 = p.radius * p.radius;
                if (n2 - r2).abs() > p.tol_constraint {
                    return Err(RotorError::Precondition(format!(
                        "embedded point has |x|^2 = {n2}, expected R^2 = {r2}"
                    )));
                }
            }
            Chart::ReducedCartesian => {
                chart_gap(&coords, p)?;
            }
            Chart::Hyperspherical => {
                let last = coords.len() - 1;
                for (k, &a) in coords.iter().enumerate() {
                    let ok = if k == last {
                        (0.0..2.0 * std::f64::consts::PI).contains(&a)
                    } else {
                        a > 0.0 && a < std::f64::consts::PI
                    };
                    if !ok {
                        return Err(RotorError::Precondition(format!("angle {} = {a} out of range", k + 1)));
                    }
                }
            }
        }
        Ok(Self { chart, coords })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Same point expressed in embedded coordinates.
    pub fn to_embedded(&self, p: &ModelParams) -> Result<Vec<f64>> {
        match self.chart {
            Chart::Embedded => Ok(self.coords.clone()),
            Chart::ReducedCartesian => lift(&self.coords, p),
            Chart::Hyperspherical => from_hyperspherical(p.radius, &self.coords, p),
        }
    }
}

fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(RotorError::DimensionMismatch { expected, got: v.len() });
    }
    Ok(())
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// R² − |x|², or a chart-domain error when it is not positive.
pub fn chart_gap(x: &[f64], p: &ModelParams) -> Result<f64> {
    check_len(x, p.dim - 1)?;
    let n2 = norm_sq(x);
    let r2 = p.radius * p.radius;
    if !(n2 < r2) {
        return Err(RotorError::ChartDomain { norm_sq: n2, radius_sq: r2 });
    }
    Ok(r2 - n2)
}

/// Induced metric `g_ij = δ_ij + x_i x_j/(R² − |x|²)`.
pub fn metric(x: &[f64], p: &ModelParams) -> Result<DMatrix<f64>> {
    let gap = chart_gap(x, p)?;
    let n = x.len();
    Ok(DMatrix::from_fn(n, n, |i, j| delta(i, j) + x[i] * x[j] / gap))
}

/// Inverse metric `g^ij = δ_ij − x_i x_j/R²`.
pub fn inverse_metric(x: &[f64], p: &ModelParams) -> Result<DMatrix<f64>> {
    chart_gap(x, p)?;
    let n = x.len();
    let r2 = p.radius * p.radius;
    Ok(DMatrix::from_fn(n, n, |i, j| delta(i, j) - x[i] * x[j] / r2))
}

/// Closed-form determinant `R²/(R² − |x|²)`.
pub fn metric_determinant(x: &[f64], p: &ModelParams) -> Result<f64> {
    let gap = chart_gap(x, p)?;
    Ok(p.radius * p.radius / gap)
}

/// Embedded point `(x, √(R² − |x|²))`.
pub fn lift(x: &[f64], p: &ModelParams) -> Result<Vec<f64>> {
    let gap = chart_gap(x, p)?;
    let mut out = x.to_vec();
    out.push(gap.sqrt());
    Ok(out)
}

/// Jacobian of [`lift`], a D × (D−1) matrix.
pub fn lift_differential(x: &[f64], p: &ModelParams) -> Result<DMatrix<f64>> {
    let gap = chart_gap(x, p)?;
    let s = gap.sqrt();
    let n = x.len();
    Ok(DMatrix::from_fn(n + 1, n, |a, j| if a < n { delta(a, j) } else { -x[j] / s }))
}

/// Forward hyperspherical map. `angles` has length D − 1.
pub fn from_hyperspherical(r: f64, angles: &[f64], p: &ModelParams) -> Result<Vec<f64>> {
    check_len(angles, p.dim - 1)?;
    let d = p.dim;
    let mut x = vec![0.0; d];
    let mut prod = r;
    for (k, &phi) in angles.iter().enumerate() {
        // angles[k] = φ_{k+1} sets x_{D−k}, zero-based index D−1−k
        x[d - 1 - k] = prod * phi.cos();
        prod *= phi.sin();
    }
    x[0] = prod;
    Ok(x)
}

/// Inverse hyperspherical map, returning `(r, angles)`.
///
/// Polar angles lie in `[0, π]`, the last angle in `[0, 2π)`. When the
/// cumulative radius feeding an angle vanishes (relative to `r`, below
/// [`ANGLE_TOL`]) that angle is undetermined and a singular-point error
/// naming it (one-based) is returned.
pub fn to_hyperspherical(x: &[f64], p: &ModelParams) -> Result<(f64, Vec<f64>)> {
    check_len(x, p.dim)?;
    let d = p.dim;
    let r = norm_sq(x).sqrt();
    if r == 0.0 {
        return Err(RotorError::SingularPoint { angle: 1 });
    }
    // rho[m] = |(x_1, …, x_m)|, accumulated from the bottom for accuracy
    let mut rho = vec![0.0f64; d + 1];
    for m in 1..=d {
        rho[m] = rho[m - 1].hypot(x[m - 1]);
    }
    let mut angles = Vec::with_capacity(d - 1);
    for k in 1..d {
        // φ_k is fixed by x_{D−k+1} against the radius of (x_1, …, x_{D−k})
        if k > 1 && rho[d - k + 1] <= ANGLE_TOL * r {
            return Err(RotorError::SingularPoint { angle: k });
        }
        let adj = x[d - k];
        if k < d - 1 {
            angles.push(rho[d - k].atan2(adj));
        } else {
            let a = x[0].atan2(adj);
            angles.push(if a < 0.0 { a + 2.0 * std::f64::consts::PI } else { a });
        }
    }
    Ok((r, angles))
}

/// Diagonal inverse metric of the angular chart,
/// `diag(1, 1/sin²φ_1, 1/(sin²φ_1 sin²φ_2), …)/R²`.
pub fn curvilinear_inverse_metric(angles: &[f64], p: &ModelParams) -> Result<DMatrix<f64>> {
    let w = curvilinear_prefactors(angles, p)?;
    let r2 = p.radius * p.radius;
    Ok(DMatrix::from_fn(w.len(), w.len(), |i, j| if i == j { w[i] / r2 } else { 0.0 }))
}

/// `P_i = Π_{j<i} sin^{−2} φ_j` for each angle, after checking the polar
/// angles stay off the poles.
pub fn curvilinear_prefactors(angles: &[f64], p: &ModelParams) -> Result<Vec<f64>> {
    check_len(angles, p.dim - 1)?;
    check_off_poles(angles)?;
    let mut out = Vec::with_capacity(angles.len());
    let mut acc = 1.0;
    for &phi in angles {
        out.push(acc);
        let s = phi.sin();
        acc /= s * s;
    }
    Ok(out)
}

/// Polar angles (all but the last) must have non-vanishing sine.
pub fn check_off_poles(angles: &[f64]) -> Result<()> {
    let polar = angles.len().saturating_sub(1);
    for (k, &phi) in angles[..polar].iter().enumerate() {
        if phi.sin().abs() <= ANGLE_TOL {
            return Err(RotorError::PoleSingularity { angle: k + 1 });
        }
    }
    Ok(())
}

/// Riemannian volume density of the angular chart, `R^{D−1} Π_k sin^{D−1−k} φ_k`.
pub fn curvilinear_volume_density(angles: &[f64], p: &ModelParams) -> f64 {
    let d = p.dim;
    let mut v = p.radius.powi(d as i32 - 1);
    for (k0, &phi) in angles.iter().enumerate() {
        v *= phi.sin().powi((d - 2 - k0) as i32);
    }
    v
}

/// Total surface measure `2π^{D/2} R^{D−1}/Γ(D/2)`.
pub fn sphere_area(p: &ModelParams) -> f64 {
    let d = p.dim;
    // Γ(D/2) via the half-integer recursion, exact for the small D used here
    let mut gamma = if d.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut a = if d.is_multiple_of(2) { 1.0 } else { 0.5 };
    while a + 1e-9 < d as f64 / 2.0 {
        gamma *= a;
        a += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) * p.radius.powi(d as i32 - 1) / gamma
}

/// Embedded coordinates as expressions of the reduced chart variables.
pub fn lift_exprs(p: &ModelParams) -> Vec<Expr> {
    let n = p.dim - 1;
    let x = Expr::vars(n);
    let gap = Expr::constant(p.radius * p.radius) - Expr::sum(x.iter().map(|v| v.powi(2)));
    let mut out = x;
    out.push(gap.sqrt());
    out
}

/// Embedded coordinates as expressions of the angle variables at radius `r`.
pub fn hyperspherical_exprs(r: f64, p: &ModelParams) -> Vec<Expr> {
    let d = p.dim;
    let phi = Expr::vars(d - 1);
    let mut x = vec![Expr::zero(); d];
    let mut prod = Expr::constant(r);
    for (k, a) in phi.iter().enumerate() {
        x[d - 1 - k] = prod.clone() * a.cos();
        prod = prod * a.sin();
    }
    x[0] = prod;
    x
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(d: usize, r: f64) -> ModelParams {
        ModelParams::new(d, r, 1.0).unwrap()
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(1, 1.0, 1.0).is_err());
        assert!(ModelParams::new(11, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3, 0.0, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, -1.0).is_err());
    }

    #[test]
    fn metric_examples() {
        let q = p(3, 1.0);
        assert_eq!(metric(&[0.0, 0.0], &q).unwrap(), DMatrix::identity(2, 2));
        let g = metric(&[0.5, 0.5], &q).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[1.5, 0.5, 0.5, 1.5]);
        assert!(max_abs_diff(&g, &want) < 1e-15);
        let gi = inverse_metric(&[0.5, 0.5], &q).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.75, -0.25, -0.25, 0.75]);
        assert!(max_abs_diff(&gi, &want) < 1e-15);
        assert!(max_abs_diff(&(g * gi), &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn chart_domain_is_open() {
        let q = p(3, 1.0);
        assert!(matches!(metric(&[1.0, 0.0], &q), Err(RotorError::ChartDomain { .. })));
        assert!(matches!(lift(&[0.8, 0.7], &q), Err(RotorError::ChartDomain { .. })));
        assert!(matches!(metric(&[0.1], &q), Err(RotorError::DimensionMismatch { .. })));
    }

    #[test]
    fn determinant_examples() {
        let q = p(3, 1.0);
        assert_eq!(metric_determinant(&[0.0, 0.0], &q).unwrap(), 1.0);
        let x = [0.5f64.sqrt() * 0.6, 0.5f64.sqrt() * 0.8];
        assert!((metric_determinant(&x, &q).unwrap() - 2.0).abs() < 1e-14);
        let q5 = p(5, 2.0);
        let x = [0.5, 0.5, 0.5, 0.5];
        let lu = metric(&x, &q5).unwrap().lu().determinant();
        assert!((metric_determinant(&x, &q5).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!((lu - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lift_examples() {
        let q = p(3, 1.0);
        assert_eq!(lift(&[0.0, 0.0], &q).unwrap(), vec![0.0, 0.0, 1.0]);
        let y = lift(&[0.6, 0.0], &q).unwrap();
        assert!((y[2] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn hyperspherical_examples() {
        let q = p(3, 1.0);
        let x = from_hyperspherical(1.0, &[PI / 2.0, 0.0], &q).unwrap();
        assert!(x[0].abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15 && x[2].abs() < 1e-15);
        let q4 = p(4, 2.0);
        assert_eq!(from_hyperspherical(2.0, &[0.0, 1.0, 2.0], &q4).unwrap(), vec![0.0, 0.0, 0.0, 2.0]);
        let q2 = p(2, 1.0);
        let x = from_hyperspherical(1.0, &[PI / 2.0], &q2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn hyperspherical_round_trip_and_singularities() {
        let q = p(4, 1.5);
        let angles = [0.4, 2.5, 5.0];
        let x = from_hyperspherical(1.5, &angles, &q).unwrap();
        let (r, back) = to_hyperspherical(&x, &q).unwrap();
        assert!((r - 1.5).abs() < 1e-14);
        for (a, b) in angles.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        // north pole: φ_2 and beyond are undetermined
        let err = to_hyperspherical(&[0.0, 0.0, 0.0, 1.5], &q).unwrap_err();
        assert_eq!(err, RotorError::SingularPoint { angle: 2 });
        // φ_2 = 0 leaves φ_3 undetermined
        let err = to_hyperspherical(&[0.0, 0.0, 1.0, 1.0], &q).unwrap_err();
        assert_eq!(err, RotorError::SingularPoint { angle: 3 });
        assert_eq!(to_hyperspherical(&[0.0; 4], &q).unwrap_err(), RotorError::SingularPoint { angle: 1 });
    }

    #[test]
    fn curvilinear_metric_examples() {
        let q = p(3, 1.0);
        let m = curvilinear_inverse_metric(&[PI / 2.0, 0.3], &q).unwrap();
        assert!(max_abs_diff(&m, &DMatrix::identity(2, 2)) < 1e-15);
        let q2 = p(3, 2.0);
        let m = curvilinear_inverse_metric(&[PI / 6.0, 0.3], &q2).unwrap();
        assert!((m[(0, 0)] - 0.25).abs() < 1e-15 && (m[(1, 1)] - 1.0).abs() < 1e-14);
        let q4 = p(4, 1.0);
        let m = curvilinear_inverse_metric(&[PI / 2.0, PI / 2.0, 1.0], &q4).unwrap();
        assert!(max_abs_diff(&m, &DMatrix::identity(3, 3)) < 1e-15);
        assert_eq!(curvilinear_inverse_metric(&[0.0, 1.0], &q).unwrap_err(), RotorError::PoleSingularity { angle: 1 });
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(&p(2, 1.0)) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(&p(3, 1.0)) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(&p(4, 1.0)) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(&p(5, 2.0)) - 8.0 / 3.0 * PI * PI * 16.0).abs() < 1e-11);
    }

    #[test]
    fn symbolic_maps_match_numeric() {
        let q = p(4, 1.3);
        let angles = [0.7, 1.9, 4.0];
        let sym: Vec<f64> = hyperspherical_exprs(1.3, &q).iter().map(|e| e.eval(&angles)).collect();
        let num = from_hyperspherical(1.3, &angles, &q).unwrap();
        for (a, b) in sym.iter().zip(&num) {
            assert!((a - b).abs() < 1e-15);
        }
        let x = [0.2, -0.4, 0.1];
        let sym: Vec<f64> = lift_exprs(&q).iter().map(|e| e.eval(&x)).collect();
        assert_eq!(sym, lift(&x, &q).unwrap());
    }
}
