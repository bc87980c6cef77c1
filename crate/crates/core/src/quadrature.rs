//! Gauss rules and tensor-product quadrature on the sphere.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};
use crate::geometry::ModelParams;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `∫_{−1}^{1} (1 − u²)^α du` for half-integer `α ≥ −½`.
pub(crate) fn jacobi_mass(alpha: f64) -> f64 {
    let twice = (2.0 * alpha).round();
    assert!((2.0 * alpha - twice).abs() < 1e-12 && twice >= -1.0, "alpha must be a half-integer >= -1/2");
    let (mut a, mut mu) = if twice as i64 % 2 == 0 { (0.0, 2.0) } else { (0.5, PI / 2.0) };
    if alpha < 0.0 {
        return PI;
    }
    while a + 0.25 < alpha {
        a += 1.0;
        mu *= 2.0 * a / (2.0 * a + 1.0);
    }
    mu
}

/// Off-diagonal recurrence coefficients `b_1, …, b_{n−1}` (index 0 unused)
/// of the orthonormal polynomials for the weight `(1 − u²)^α`:
/// `u p_k = b_{k+1} p_{k+1} + b_k p_{k−1}`.
pub(crate) fn jacobi_recurrence(n: usize, alpha: f64) -> Vec<f64> {
    let mut b = vec![0.0; n.max(1)];
    for (k, bk) in b.iter_mut().enumerate().take(n).skip(1) {
        let kf = k as f64;
        // the general formula is 0/0 at k = 1 for α = −½; b_1² is the second moment ratio
        let b2 = if k == 1 {
            1.0 / (2.0 * alpha + 3.0)
        } else {
            kf * (kf + 2.0 * alpha) / (4.0 * (kf + alpha).powi(2) - 1.0)
        };
        *bk = b2.sqrt();
    }
    b
}

/// Gauss rule for the weight `(1 − u²)^α` on `[−1, 1]` (Golub-Welsch).
///
/// `α` must be a half-integer `≥ −½`; `α = 0` is Gauss-Legendre. Nodes
/// are returned in ascending order.
pub fn gauss_jacobi(n: usize, alpha: f64) -> Result<Rule> {
    if n < 1 {
        return Err(RotorError::Config("a Gauss rule needs at least one node".into()));
    }
    let b = jacobi_recurrence(n, alpha);
    let mut jac = DMatrix::zeros(n, n);
    for k in 1..n {
        jac[(k, k - 1)] = b[k];
        jac[(k - 1, k)] = b[k];
    }
    let eig = SymmetricEigen::new(jac);
    let p0 = 1.0 / jacobi_mass(alpha).sqrt();
    // Christoffel numbers 1/Σ p_k(u)² keep full relative accuracy in the
    // tails, where eigenvector components of the Jacobi matrix do not
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .map(|&u| {
            let (mut prev, mut cur) = (0.0, p0);
            let mut sum = p0 * p0;
            for k in 0..n - 1 {
                let next = (u * cur - b[k] * prev) / b[k + 1];
                sum += next * next;
                (prev, cur) = (cur, next);
            }
            (u, 1.0 / sum)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // exact symmetry of the rule about u = 0
    for k in 0..n / 2 {
        let j = n - 1 - k;
        let x = 0.5 * (pairs[j].0 - pairs[k].0);
        let w = 0.5 * (pairs[j].1 + pairs[k].1);
        pairs[k] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Ok(Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}

pub fn gauss_legendre(n: usize) -> Result<Rule> {
    gauss_jacobi(n, 0.0)
}

/// Gauss-Legendre mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Result<Rule> {
    let r = gauss_legendre(n)?;
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(Rule { nodes: r.nodes.iter().map(|u| c + h * u).collect(), weights: r.weights.iter().map(|w| h * w).collect() })
}

/// Uniform periodic rule on `[0, 2π)`.
pub fn periodic(n: usize) -> Rule {
    let h = 2.0 * PI / n as f64;
    Rule { nodes: (0..n).map(|k| k as f64 * h).collect(), weights: vec![h; n] }
}

/// How the polar angles are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolarRule {
    /// Gauss-Legendre in the angle itself, with the sine weight folded into
    /// the quadrature weights. Robust for integrands with `cot φ` factors.
    #[default]
    GaussInAngle,
    /// Gauss-Jacobi in `cos φ` absorbing the sine weight exactly.
    GaussInCosine,
}

/// Resolution and polar discretization of a sphere quadrature. The azimuth
/// gets twice the polar node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub resolution: usize,
    #[serde(default)]
    pub polar: PolarRule,
}

impl QuadratureSpec {
    pub fn new(resolution: usize) -> Self {
        Self { resolution, polar: PolarRule::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(RotorError::Config(format!("quadrature resolution {} < 2", self.resolution)));
        }
        Ok(())
    }
}

/// Tensor-product rule over the angle chart: each point carries its angles
/// and the full weight (surface element included), so
/// `Σ w f(angles) ≈ ∫_{S^{D−1}_R} f dA`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Whole sphere.
    pub fn full(spec: &QuadratureSpec, p: &ModelParams) -> Result<Self> {
        Self::build(spec, p, false)
    }

    /// Open upper hemisphere `φ_1 ∈ (0, π/2)`, the image of the reduced chart.
    /// The polar rule is always Gauss-in-angle here.
    pub fn upper_hemisphere(spec: &QuadratureSpec, p: &ModelParams) -> Result<Self> {
        Self::build(spec, p, true)
    }

    fn build(spec: &QuadratureSpec, p: &ModelParams, hemisphere: bool) -> Result<Self> {
        spec.validate()?;
        let d = p.dim();
        let n = spec.resolution;
        let mut factors: Vec<Rule> = Vec::with_capacity(d - 1);
        for k in 1..d - 1 {
            // weight sin^{a} φ_k with a = D − 1 − k
            let a = (d - 1 - k) as i32;
            let top = if hemisphere && k == 1 { PI / 2.0 } else { PI };
            let rule = match spec.polar {
                PolarRule::GaussInCosine if !(hemisphere && k == 1) => {
                    let g = gauss_jacobi(n, 0.5 * (a as f64 - 1.0))?;
                    Rule { nodes: g.nodes.iter().map(|u| u.acos()).collect(), weights: g.weights }
                }
                _ => {
                    let g = gauss_legendre_on(n, 0.0, top)?;
                    let weights = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * t.sin().powi(a)).collect();
                    Rule { nodes: g.nodes, weights }
                }
            };
            factors.push(rule);
        }
        let az = if d == 2 && hemisphere {
            // the chart image on the circle is the arc x_2 > 0, φ ∈ (−π/2, π/2)
            gauss_legendre_on(n, -PI / 2.0, PI / 2.0)?
        } else {
            periodic(2 * n)
        };
        factors.push(az);
        let scale = p.radius().powi(d as i32 - 1);
        let mut points = vec![Vec::new()];
        let mut weights = vec![scale];
        for f in &factors {
            let mut np = Vec::with_capacity(points.len() * f.len());
            let mut nw = Vec::with_capacity(points.len() * f.len());
            for (pt, w) in points.iter().zip(&weights) {
                for (x, wx) in f.nodes.iter().zip(&f.weights) {
                    let mut q = pt.clone();
                    q.push(*x);
                    np.push(q);
                    nw.push(w * wx);
                }
            }
            points = np;
            weights = nw;
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
