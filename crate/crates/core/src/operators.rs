//! Quantum operators acting on exactly differentiable test functions.
//!
//! Cartesian-chart operators take reduced coordinates `x` (length D−1) and
//! act on functions tagged [`Chart::ReducedCartesian`]; curvilinear ones take
//! the angles `φ` (length D−1) and act on [`Chart::Hyperspherical`] functions.
//! Every operator keeps ħ explicit. Indices in the public API are one-based,
//! matching the physics notation `x_1, …, x_D` and `φ_1, …, φ_{D−1}`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Result, RotorError};
use crate::expr::{Expr, Jet, Tape};
use crate::geometry::{chart_gap, check_off_poles, curvilinear_prefactors, from_hyperspherical, Chart, ModelParams};
use crate::quadrature::{QuadratureSpec, SphereRule};

/// A scalar field on one chart, with exact derivatives through its compiled tape.
#[derive(Debug, Clone)]
pub struct TestFunction {
    expr: Expr,
    chart: Chart,
    tape: OnceLock<Tape>,
}

impl TestFunction {
    pub fn new(expr: Expr, chart: Chart) -> Self {
        Self { expr, chart, tape: OnceLock::new() }
    }

    pub fn constant(c: f64, chart: Chart) -> Self {
        Self::new(Expr::constant(c), chart)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    fn tape(&self) -> &Tape {
        self.tape.get_or_init(|| Tape::compile(&self.expr))
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        if self.tape().arity() == 0 {
            return self.expr.as_constant().unwrap_or_else(|| self.tape().eval(&[0.0]));
        }
        self.tape().eval(point)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn jet(&self, point: &[f64]) -> Jet {
        self.tape().eval_scalar(&Jet::seed(point))
    }

    fn require(&self, chart: Chart) -> Result<()> {
        if self.chart != chart {
            return Err(RotorError::Precondition(format!(
                "operator expects a {chart:?} function, got {:?}",
                self.chart
            )));
        }
        Ok(())
    }
}

/// Operators the crate can apply and test for hermiticity.
#[derive(Debug, Clone)]
pub enum OperatorTag {
    HamiltonianCartesian,
    HamiltonianCurvilinear,
    /// `Σ_{α<β} L_αβ²/(2R²)` in the reduced chart.
    L2Over2R2,
    MomentumCartesian(usize),
    MomentumCurvilinear(usize),
    AngularMomentum(usize, usize),
    /// Control: multiplication by a real function on the given chart.
    Multiply(TestFunction),
    /// Control: `−(ħ²/2R²) Σ_i P_i ∂_i²`, the angular Laplacian with the
    /// measure-dependent first-order terms dropped.
    UnsymmetrizedLaplacian,
}

impl OperatorTag {
    /// Chart the operator acts on.
    pub fn chart(&self) -> Chart {
        match self {
            Self::HamiltonianCartesian | Self::L2Over2R2 | Self::MomentumCartesian(_) | Self::AngularMomentum(..) => {
                Chart::ReducedCartesian
            }
            Self::HamiltonianCurvilinear | Self::MomentumCurvilinear(_) | Self::UnsymmetrizedLaplacian => {
                Chart::Hyperspherical
            }
            Self::Multiply(f) => f.chart(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::HamiltonianCartesian => "hamiltonian-cartesian".into(),
            Self::HamiltonianCurvilinear => "hamiltonian-curvilinear".into(),
            Self::L2Over2R2 => "l2-over-2r2".into(),
            Self::MomentumCartesian(i) => format!("momentum-cartesian-{i}"),
            Self::MomentumCurvilinear(i) => format!("momentum-curvilinear-{i}"),
            Self::AngularMomentum(a, b) => format!("angular-momentum-{a}{b}"),
            Self::Multiply(_) => "multiply".into(),
            Self::UnsymmetrizedLaplacian => "unsymmetrized-laplacian".into(),
        }
    }

    /// Every physical operator for dimension D (controls excluded).
    pub fn all_physical(d: usize) -> Vec<Self> {
        let mut out = vec![Self::HamiltonianCartesian, Self::HamiltonianCurvilinear, Self::L2Over2R2];
        out.extend((1..d).map(Self::MomentumCartesian));
        out.extend((1..d).map(Self::MomentumCurvilinear));
        for a in 1..=d {
            out.extend((a + 1..=d).map(|b| Self::AngularMomentum(a, b)));
        }
        out
    }

    /// Apply to `f` at a point of the operator's chart.
    pub fn apply(&self, f: &TestFunction, point: &[f64], p: &ModelParams) -> Result<Complex64> {
        match self {
            Self::HamiltonianCartesian => apply_hamiltonian_cartesian(f, point, p),
            Self::HamiltonianCurvilinear => apply_hamiltonian_curvilinear(f, point, p),
            Self::L2Over2R2 => apply_l2_over_2r2(f, point, p),
            Self::MomentumCartesian(i) => apply_momentum_cartesian(f, point, *i, p),
            Self::MomentumCurvilinear(i) => apply_momentum_curvilinear(f, point, *i, p),
            Self::AngularMomentum(a, b) => apply_angular_momentum(f, *a, *b, point, p),
            Self::Multiply(m) => {
                f.require(m.chart())?;
                Ok(Complex64::new(m.eval(point) * f.eval(point), 0.0))
            }
            Self::UnsymmetrizedLaplacian => {
                f.require(Chart::Hyperspherical)?;
                let pre = curvilinear_prefactors(point, p)?;
                let j = f.jet(point);
                let s: f64 = (0..point.len()).map(|i| pre[i] * j.d2(i, i)).sum();
                Ok(Complex64::new(-p.hbar() * p.hbar() / (2.0 * p.radius().powi(2)) * s, 0.0))
            }
        }
    }
}

fn minus_i_hbar(p: &ModelParams, v: f64) -> Complex64 {
    Complex64::new(0.0, -p.hbar() * v)
}

fn check_index(i: usize, limit: usize) -> Result<usize> {
    if i == 0 || i > limit {
        return Err(RotorError::IndexOutOfRange { index: i, limit });
    }
    Ok(i - 1)
}

/// `π̂_i f = −iħ g^{−1/4} ∂_i (g^{1/4} f)` with `g = R²/(R² − |x|²)`.
pub fn apply_momentum_cartesian(f: &TestFunction, x: &[f64], i: usize, p: &ModelParams) -> Result<Complex64> {
    f.require(Chart::ReducedCartesian)?;
    let k = check_index(i, p.chart_dim())?;
    let gap = chart_gap(x, p)?;
    let j = f.jet(x);
    // ∂_i ln g^{1/4} = x_i / (2 (R² − |x|²))
    Ok(minus_i_hbar(p, j.d(k) + j.value * x[k] / (2.0 * gap)))
}

/// `Ĥ f = −(ħ²/2) √(R²−|x|²) ∂_i [(δ_ij − x_i x_j/R²)(R²−|x|²)^{−1/2} ∂_j f]`,
/// expanded by the product rule.
pub fn apply_hamiltonian_cartesian(f: &TestFunction, x: &[f64], p: &ModelParams) -> Result<Complex64> {
    f.require(Chart::ReducedCartesian)?;
    let gap = chart_gap(x, p)?;
    let n = x.len();
    let r2 = p.radius() * p.radius();
    let j = f.jet(x);
    let s = gap.sqrt();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let delta = if i == k { 1.0 } else { 0.0 };
            let a_ik = delta - x[i] * x[k] / r2;
            let da_ik = -(x[k] + delta * x[i]) / r2;
            // ∂_i [a_ik s^{−1} ∂_k f], one product-rule term per factor
            acc += da_ik / s * j.d(k) + a_ik * x[i] / (s * s * s) * j.d(k) + a_ik / s * j.d2(i, k);
        }
    }
    Ok(Complex64::new(-0.5 * p.hbar() * p.hbar() * s * acc, 0.0))
}

/// `Ĥ f = −(ħ²/2R²) Σ_i P_i [∂_i² f + (D−1−i) cot φ_i ∂_i f]`, the
/// expanded form of `P_i sin^{−w_i} φ_i ∂_i (sin^{w_i} φ_i ∂_i f)`.
pub fn apply_hamiltonian_curvilinear(f: &TestFunction, angles: &[f64], p: &ModelParams) -> Result<Complex64> {
    f.require(Chart::Hyperspherical)?;
    let pre = curvilinear_prefactors(angles, p)?;
    let d = p.dim();
    let j = f.jet(angles);
    let mut acc = 0.0;
    for (k, &phi) in angles.iter().enumerate() {
        let w = (d - 2 - k) as f64;
        let first = if w == 0.0 { 0.0 } else { w * phi.cos() / phi.sin() * j.d(k) };
        acc += pre[k] * (j.d2(k, k) + first);
    }
    Ok(Complex64::new(-p.hbar() * p.hbar() / (2.0 * p.radius().powi(2)) * acc, 0.0))
}

/// `L_ij = −iħ(x_i ∂_j − x_j ∂_i)` for `i, j < D`, and
/// `L_iD = iħ √(R²−|x|²) ∂_i`. Requires `1 ≤ α < β ≤ D`.
pub fn apply_angular_momentum(
    f: &TestFunction,
    alpha: usize,
    beta: usize,
    x: &[f64],
    p: &ModelParams,
) -> Result<Complex64> {
    f.require(Chart::ReducedCartesian)?;
    let d = p.dim();
    let a = check_index(alpha, d)?;
    let b = check_index(beta, d)?;
    if a >= b {
        return Err(RotorError::Precondition(format!("angular momentum needs alpha < beta, got ({alpha}, {beta})")));
    }
    let gap = chart_gap(x, p)?;
    let j = f.jet(x);
    if b < d - 1 {
        Ok(minus_i_hbar(p, x[a] * j.d(b) - x[b] * j.d(a)))
    } else {
        Ok(Complex64::new(0.0, p.hbar() * gap.sqrt() * j.d(a)))
    }
}

/// `L_αβ (L_αβ f)` from second derivatives of `f`.
pub fn apply_angular_momentum_squared(
    f: &TestFunction,
    alpha: usize,
    beta: usize,
    x: &[f64],
    p: &ModelParams,
) -> Result<f64> {
    f.require(Chart::ReducedCartesian)?;
    let d = p.dim();
    let a = check_index(alpha, d)?;
    let b = check_index(beta, d)?;
    if a >= b {
        return Err(RotorError::Precondition(format!("angular momentum needs alpha < beta, got ({alpha}, {beta})")));
    }
    let gap = chart_gap(x, p)?;
    let j = f.jet(x);
    let h2 = p.hbar() * p.hbar();
    if b < d - 1 {
        let (xi, xj) = (x[a], x[b]);
        let l = xi * xi * j.d2(b, b) + xj * xj * j.d2(a, a) - 2.0 * xi * xj * j.d2(a, b) - xi * j.d(a) - xj * j.d(b);
        Ok(-h2 * l)
    } else {
        // (s ∂_i)² f = s ∂_i s ∂_i f + s² ∂_i² f with s ∂_i s = −x_i
        Ok(-h2 * (-x[a] * j.d(a) + gap * j.d2(a, a)))
    }
}

/// `Σ_{α<β} L_αβ² f / (2R²)`.
pub fn apply_l2_over_2r2(f: &TestFunction, x: &[f64], p: &ModelParams) -> Result<Complex64> {
    let d = p.dim();
    let mut acc = 0.0;
    for a in 1..=d {
        for b in a + 1..=d {
            acc += apply_angular_momentum_squared(f, a, b, x, p)?;
        }
    }
    Ok(Complex64::new(acc / (2.0 * p.radius().powi(2)), 0.0))
}

/// Hermitian angular momentum conjugate to `φ_i`:
/// `π_φi f = −iħ sin^{−c} φ_i ∂_i (sin^{c} φ_i f)` with `c = (D−1−i)/2`,
/// half the exponent of `sin φ_i` in the volume density. The last angle
/// gets the plain derivative.
pub fn apply_momentum_curvilinear(f: &TestFunction, angles: &[f64], i: usize, p: &ModelParams) -> Result<Complex64> {
    let k = check_index(i, p.chart_dim())?;
    let c = 0.5 * (p.dim() - 1 - (k + 1)) as f64;
    apply_momentum_curvilinear_with_exponent(f, angles, i, c, p)
}

/// `−iħ sin^{−c} φ_i ∂_i (sin^{c} φ_i f)` for an arbitrary exponent `c`.
/// Only `c = (D−1−i)/2` is hermitian under the sphere measure.
pub fn apply_momentum_curvilinear_with_exponent(
    f: &TestFunction,
    angles: &[f64],
    i: usize,
    c: f64,
    p: &ModelParams,
) -> Result<Complex64> {
    f.require(Chart::Hyperspherical)?;
    let k = check_index(i, p.chart_dim())?;
    if angles.len() != p.chart_dim() {
        return Err(RotorError::DimensionMismatch { expected: p.chart_dim(), got: angles.len() });
    }
    check_off_poles(angles)?;
    let j = f.jet(angles);
    let phi = angles[k];
    let cot_term = if c == 0.0 { 0.0 } else { c * phi.cos() / phi.sin() * j.value };
    Ok(minus_i_hbar(p, j.d(k) + cot_term))
}

/// Quadrature points of a chart with their weights (surface element included).
/// Reduced-chart points cover the upper hemisphere.
pub fn chart_rule(chart: Chart, p: &ModelParams, spec: &QuadratureSpec) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    match chart {
        Chart::Hyperspherical => {
            let r = SphereRule::full(spec, p)?;
            Ok((r.points, r.weights))
        }
        Chart::ReducedCartesian => {
            let r = SphereRule::upper_hemisphere(spec, p)?;
            let mut pts = Vec::with_capacity(r.len());
            for a in &r.points {
                let mut x = from_hyperspherical(p.radius(), a, p)?;
                x.pop();
                pts.push(x);
            }
            Ok((pts, r.weights))
        }
        Chart::Embedded => Err(RotorError::Precondition("no quadrature for the embedded chart".into())),
    }
}

/// `⟨f, h⟩ = ∫ conj(f) h √g` over the chart.
pub fn inner_product(
    f: &TestFunction,
    h: &TestFunction,
    chart: Chart,
    p: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    f.require(chart)?;
    h.require(chart)?;
    let (pts, w) = chart_rule(chart, p, spec)?;
    let s: f64 = pts.iter().zip(&w).map(|(x, wx)| wx * f.eval(x) * h.eval(x)).sum();
    Ok(Complex64::new(s, 0.0))
}

/// `|⟨f, Op h⟩ − ⟨Op f, h⟩|` under the chart's volume measure.
pub fn hermiticity_defect(
    op: &OperatorTag,
    f: &TestFunction,
    h: &TestFunction,
    p: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    hermiticity_defect_by(|g, x| op.apply(g, x, p), op.chart(), f, h, p, spec)
}

/// Hermiticity defect of an arbitrary pointwise operator.
pub fn hermiticity_defect_by(
    apply: impl Fn(&TestFunction, &[f64]) -> Result<Complex64>,
    chart: Chart,
    f: &TestFunction,
    h: &TestFunction,
    p: &ModelParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    f.require(chart)?;
    h.require(chart)?;
    let (pts, w) = chart_rule(chart, p, spec)?;
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    for (x, &wx) in pts.iter().zip(&w) {
        lhs += wx * f.eval(x) * apply(h, x)?;
        rhs += wx * apply(f, x)?.conj() * h.eval(x);
    }
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(d: usize) -> ModelParams {
        ModelParams::unit(d).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn momentum_cartesian_examples() {
        let p = ModelParams::new(3, 1.3, 0.7).unwrap();
        let c = TestFunction::constant(2.0, Chart::ReducedCartesian);
        let x = [0.3, -0.5];
        let gap = 1.69 - 0.34;
        for i in 1..=2 {
            let got = apply_momentum_cartesian(&c, &x, i, &p).unwrap();
            let want = Complex64::new(0.0, -0.7 * 2.0 * x[i - 1] / (2.0 * gap));
            assert!(close(got, want, 1e-15));
        }
        let v = Expr::vars(2);
        let f = TestFunction::new(v[1].clone(), Chart::ReducedCartesian);
        assert_eq!(apply_momentum_cartesian(&f, &[0.0, 0.0], 2, &p).unwrap(), Complex64::new(0.0, -0.7));
        assert_eq!(apply_momentum_cartesian(&f, &[0.0, 0.0], 1, &p).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(apply_momentum_cartesian(&f, &x, 3, &p), Err(RotorError::IndexOutOfRange { .. })));
        assert!(matches!(apply_momentum_cartesian(&f, &[1.0, 1.0], 1, &p), Err(RotorError::ChartDomain { .. })));
    }

    #[test]
    fn hamiltonian_cartesian_examples() {
        let p = params(3);
        let one = TestFunction::constant(1.0, Chart::ReducedCartesian);
        assert_eq!(apply_hamiltonian_cartesian(&one, &[0.2, 0.4], &p).unwrap().norm(), 0.0);
        // cos θ pulled back is the lifted height
        let v = Expr::vars(2);
        let f = TestFunction::new((1.0 - v[0].powi(2) - v[1].powi(2)).sqrt(), Chart::ReducedCartesian);
        for x in [[0.1, 0.2], [-0.5, 0.6], [0.0, 0.0]] {
            let got = apply_hamiltonian_cartesian(&f, &x, &p).unwrap();
            assert!(close(got, Complex64::new(f.eval(&x), 0.0), 1e-14));
        }
        let p2 = params(2);
        let f = TestFunction::new(Expr::var(0), Chart::ReducedCartesian);
        let got = apply_hamiltonian_cartesian(&f, &[0.3], &p2).unwrap();
        assert!(close(got, Complex64::new(0.15, 0.0), 1e-15));
    }

    #[test]
    fn hamiltonian_cartesian_matches_symbolic_laplace_beltrami() {
        // −(ħ²/2) g^{−1/2} ∂_i (g^{1/2} g^{ij} ∂_j f) built symbolically
        let p = ModelParams::new(4, 1.4, 0.9).unwrap();
        let n = 3;
        let v = Expr::vars(n);
        let r2 = Expr::constant(1.96);
        let gap = r2.clone() - Expr::sum(v.iter().map(|a| a.powi(2)));
        let det = r2.clone() / gap;
        let f_expr = v[0].clone() * v[1].powi(2) + v[2].sin() * v[0].clone() + 0.3;
        let mut total = Expr::zero();
        for i in 0..n {
            let mut flux = Expr::zero();
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let ginv = delta - v[i].clone() * v[j].clone() / r2.clone();
                flux = flux + ginv * f_expr.diff(j);
            }
            total = total + (det.sqrt() * flux).diff(i);
        }
        let lb = -0.5 * 0.81 * total / det.sqrt();
        let f = TestFunction::new(f_expr, Chart::ReducedCartesian);
        for x in [[0.1, -0.2, 0.3], [0.7, 0.2, -0.6], [0.0, 0.0, 0.0]] {
            let got = apply_hamiltonian_cartesian(&f, &x, &p).unwrap();
            let want = lb.eval(&x);
            assert!((got.re - want).abs() < 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
        }
    }

    #[test]
    fn hamiltonian_curvilinear_examples() {
        let p = params(3);
        let a = Expr::vars(2);
        let one = TestFunction::constant(1.0, Chart::Hyperspherical);
        assert_eq!(apply_hamiltonian_curvilinear(&one, &[1.0, 2.0], &p).unwrap().norm(), 0.0);
        let cases = [(a[0].cos(), 1.0), (a[0].sin() * a[1].cos(), 1.0), (3.0 * a[0].cos().powi(2) - 1.0, 3.0)];
        for (e, lambda) in cases {
            let f = TestFunction::new(e, Chart::Hyperspherical);
            for pt in [[0.4, 1.0], [2.0, 5.5]] {
                let got = apply_hamiltonian_curvilinear(&f, &pt, &p).unwrap();
                assert!(close(got, Complex64::new(lambda * f.eval(&pt), 0.0), 1e-14));
            }
        }
        assert!(matches!(
            apply_hamiltonian_curvilinear(&one, &[PI, 1.0], &p),
            Err(RotorError::PoleSingularity { angle: 1 })
        ));
    }

    #[test]
    fn curvilinear_reduces_to_two_sphere_form() {
        // −(ħ²/2R²)[(1/sinθ) ∂_θ(sinθ ∂_θ f) + ∂_φ² f / sin²θ] written out by hand
        let p = ModelParams::new(3, 1.7, 1.3).unwrap();
        let a = Expr::vars(2);
        let e = a[0].sin().powi(3) * (2.0 * a[1].clone()).cos() + a[0].cos() * a[1].sin();
        let f = TestFunction::new(e.clone(), Chart::Hyperspherical);
        let inner = (a[0].sin() * e.diff(0)).diff(0) / a[0].sin() + e.diff(1).diff(1) / a[0].sin().powi(2);
        let pt = [0.9, 2.2];
        let want = -1.69 / (2.0 * 2.89) * inner.eval(&pt);
        let got = apply_hamiltonian_curvilinear(&f, &pt, &p).unwrap();
        assert!((got.re - want).abs() < 1e-13);
    }

    #[test]
    fn angular_momentum_examples() {
        let p = params(3);
        let one = TestFunction::constant(1.0, Chart::ReducedCartesian);
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            assert_eq!(apply_angular_momentum(&one, a, b, &[0.1, 0.2], &p).unwrap().norm(), 0.0);
        }
        let f = TestFunction::new(Expr::var(0), Chart::ReducedCartesian);
        let got = apply_angular_momentum(&f, 1, 2, &[0.3, 0.4], &p).unwrap();
        assert!(close(got, Complex64::new(0.0, 0.4), 1e-15));
        let got = apply_angular_momentum(&f, 1, 3, &[0.3, 0.4], &p).unwrap();
        assert!(close(got, Complex64::new(0.0, (1.0f64 - 0.25).sqrt()), 1e-15));
        assert!(apply_angular_momentum(&f, 2, 1, &[0.3, 0.4], &p).is_err());
        assert!(apply_angular_momentum(&f, 1, 4, &[0.3, 0.4], &p).is_err());
    }

    #[test]
    fn squared_angular_momentum_is_composition() {
        // L(L f) via the first-order operator applied to a symbolic L f
        let p = ModelParams::new(3, 1.2, 0.8).unwrap();
        let v = Expr::vars(2);
        let e = v[0].powi(2) * v[1].clone() + v[1].cos();
        let f = TestFunction::new(e.clone(), Chart::ReducedCartesian);
        let s = (Expr::constant(1.44) - v[0].powi(2) - v[1].powi(2)).sqrt();
        let x = [0.2, -0.5];
        // L_12 f = −iħ g12, with g12 real; L_12² f = −ħ² (x_1∂_2 − x_2∂_1) g12
        let g12 = v[0].clone() * e.diff(1) - v[1].clone() * e.diff(0);
        let ll12 = -0.64 * (v[0].clone() * g12.diff(1) - v[1].clone() * g12.diff(0)).eval(&x);
        let got = apply_angular_momentum_squared(&f, 1, 2, &x, &p).unwrap();
        assert!((got - ll12).abs() < 1e-13);
        let g13 = s.clone() * e.diff(0);
        let ll13 = -0.64 * (s * g13.diff(0)).eval(&x);
        let got = apply_angular_momentum_squared(&f, 1, 3, &x, &p).unwrap();
        assert!((got - ll13).abs() < 1e-13);
    }

    #[test]
    fn casimir_identity_and_pair_counting() {
        // on the circle f = x_1 = sin φ: Ĥ f = f/2 and L_12² f = f
        let p = params(2);
        let f = TestFunction::new(Expr::var(0), Chart::ReducedCartesian);
        let x = [0.6];
        let h = apply_hamiltonian_cartesian(&f, &x, &p).unwrap().re;
        let l2 = apply_angular_momentum_squared(&f, 1, 2, &x, &p).unwrap();
        assert!((h - 0.3).abs() < 1e-15);
        assert!((l2 - 0.6).abs() < 1e-15);
        // Σ_{α<β} L²/R² is exactly twice the Hamiltonian
        assert!((l2 / 1.0 - 2.0 * h).abs() < 1e-15);
        assert!((apply_l2_over_2r2(&f, &x, &p).unwrap().re - h).abs() < 1e-15);
    }

    #[test]
    fn momentum_curvilinear_examples() {
        let p = ModelParams::new(3, 1.0, 1.5).unwrap();
        let one = TestFunction::constant(1.0, Chart::Hyperspherical);
        let theta: f64 = 0.8;
        let got = apply_momentum_curvilinear(&one, &[theta, 0.1], 1, &p).unwrap();
        assert!(close(got, Complex64::new(0.0, -1.5 * theta.cos() / theta.sin() / 2.0), 1e-15));
        let a = Expr::vars(2);
        let f = TestFunction::new(a[1].cos(), Chart::Hyperspherical);
        let got = apply_momentum_curvilinear(&f, &[theta, 0.4], 2, &p).unwrap();
        assert!(close(got, Complex64::new(0.0, 1.5 * 0.4f64.sin()), 1e-15));
        assert!(apply_momentum_curvilinear(&one, &[0.0, 0.4], 1, &p).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let p = params(3);
        let spec = QuadratureSpec::new(16);
        let a = Expr::vars(2);
        let one = TestFunction::constant(1.0, Chart::Hyperspherical);
        let c = TestFunction::new(a[0].cos(), Chart::Hyperspherical);
        let ip = |f: &TestFunction, g: &TestFunction| inner_product(f, g, Chart::Hyperspherical, &p, &spec).unwrap().re;
        assert!((ip(&one, &one) - 4.0 * PI).abs() < 1e-10);
        assert!(ip(&c, &one).abs() < 1e-12);
        assert!((ip(&c, &c) - 4.0 * PI / 3.0).abs() < 1e-10);
        let bad = QuadratureSpec::new(1);
        assert!(matches!(inner_product(&one, &one, Chart::Hyperspherical, &p, &bad), Err(RotorError::Config(_))));
    }

    #[test]
    fn wrong_chart_is_rejected() {
        let p = params(3);
        let f = TestFunction::constant(1.0, Chart::Hyperspherical);
        assert!(matches!(apply_hamiltonian_cartesian(&f, &[0.1, 0.1], &p), Err(RotorError::Precondition(_))));
    }
}
