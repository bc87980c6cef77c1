//! Seeded families of smooth functions on the sphere and sample points.
//!
//! Functions are polynomials in the embedded coordinates `y_1, …, y_D`,
//! pulled back to either chart by symbolic substitution.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::geometry::{from_hyperspherical, hyperspherical_exprs, lift_exprs, Chart, ModelParams};
use crate::operators::TestFunction;

/// Polynomial in embedded coordinates with a bound on its size on the sphere.
#[derive(Debug, Clone)]
pub struct SphereFunction {
    pub embedded: Expr,
    /// Upper bound for `|f|` on the sphere; sets the floor of relative errors.
    pub scale: f64,
    /// Polynomial degree.
    pub degree: usize,
}

impl SphereFunction {
    /// The same function as a field on `chart`.
    pub fn pullback(&self, chart: Chart, p: &ModelParams) -> TestFunction {
        let e = match chart {
            Chart::Embedded => self.embedded.clone(),
            Chart::ReducedCartesian => self.embedded.substitute(&lift_exprs(p)),
            Chart::Hyperspherical => self.embedded.substitute(&hyperspherical_exprs(p.radius(), p)),
        };
        TestFunction::new(e, chart)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two random orthonormal vectors in `R^d` (Gram-Schmidt on uniform draws).
fn orthonormal_pair(d: usize, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if na < 0.1 {
            continue;
        }
        let u: Vec<f64> = a.iter().map(|v| v / na).collect();
        let proj: f64 = u.iter().zip(&b).map(|(x, y)| x * y).sum();
        let w: Vec<f64> = b.iter().zip(&u).map(|(y, x)| y - proj * x).collect();
        let nw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nw < 0.1 {
            continue;
        }
        return (u, w.iter().map(|v| v / nw).collect());
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Re` or `Im` of `((u + i v)·y)^l` for orthonormal `u, v`. Harmonic
/// because `(u + iv)·(u + iv) = 0`; the restriction to the sphere is a
/// degree-`l` spherical harmonic.
pub fn harmonic_polynomial(u: &[f64], v: &[f64], l: usize, imaginary: bool, p: &ModelParams) -> SphereFunction {
    let y = Expr::vars(u.len());
    let a = crate::expr::linear_form(u, &y);
    let b = crate::expr::linear_form(v, &y);
    let mut terms = Vec::new();
    for k in 0..=l {
        // i^k is real for even k and imaginary for odd k
        if (k % 2 == 1) != imaginary {
            continue;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * binomial(l, k) * a.powi((l - k) as i32) * b.powi(k as i32));
    }
    let e = Expr::sum(terms);
    // |(u + iv)·y| ≤ √2 R on the sphere
    SphereFunction { embedded: e, scale: (2f64.sqrt() * p.radius()).powi(l as i32), degree: l }
}

/// `n` harmonic polynomials cycling through degrees `1..=l_max` and real or
/// imaginary parts, with random orthonormal frames.
pub fn harmonic_family(n: usize, l_max: usize, p: &ModelParams, seed: u64) -> Vec<SphereFunction> {
    let mut r = rng(seed);
    (0..n)
        .map(|k| {
            let (u, v) = orthonormal_pair(p.dim(), &mut r);
            let l = 1 + k % l_max;
            harmonic_polynomial(&u, &v, l, (k / l_max) % 2 == 1, p)
        })
        .collect()
}

/// Random polynomial of total degree ≤ `degree` in the embedded coordinates,
/// coefficients uniform in `[−1, 1]`.
pub fn random_polynomial(degree: usize, p: &ModelParams, rng: &mut impl Rng) -> SphereFunction {
    let d = p.dim();
    let y = Expr::vars(d);
    let mut terms = Vec::new();
    let mut l1 = 0.0;
    for exps in monomials(d, degree) {
        let c: f64 = rng.random_range(-1.0..1.0);
        l1 += c.abs();
        let mono = exps.iter().enumerate().fold(Expr::one(), |acc, (i, &e)| acc * y[i].powi(e as i32));
        terms.push(c * mono);
    }
    SphereFunction { embedded: Expr::sum(terms), scale: l1 * p.radius().max(1.0).powi(degree as i32), degree }
}

/// Exponent vectors of all monomials in `d` variables of total degree ≤ `degree`.
pub fn monomials(d: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; d];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, degree, &mut cur, &mut out);
    out
}

/// A point that is regular in both charts.
#[derive(Debug, Clone)]
pub struct DualPoint {
    pub angles: Vec<f64>,
    pub reduced: Vec<f64>,
}

/// Random points on the upper hemisphere kept `margin` radians away from the
/// equator and from the angular chart's poles.
pub fn dual_chart_points(n: usize, p: &ModelParams, seed: u64, margin: f64) -> Vec<DualPoint> {
    let mut r = rng(seed);
    let d = p.dim();
    (0..n)
        .map(|_| {
            let mut angles = Vec::with_capacity(d - 1);
            if d == 2 {
                let t: f64 = r.random_range(-PI / 2.0 + margin..PI / 2.0 - margin);
                angles.push(if t < 0.0 { t + 2.0 * PI } else { t });
            } else {
                angles.push(r.random_range(margin..PI / 2.0 - margin));
                for _ in 1..d - 2 {
                    angles.push(r.random_range(margin..PI - margin));
                }
                angles.push(r.random_range(0.0..2.0 * PI));
            }
            let mut reduced = from_hyperspherical(p.radius(), &angles, p).expect("angles have chart length");
            reduced.pop();
            DualPoint { angles, reduced }
        })
        .collect()
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_deviation(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
