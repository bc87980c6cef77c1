//! Constrained bracket algebra of the 2-sphere checked in canonical angles.
//!
//! With `x = r n(θ, φ)` and the point transformation's inverse
//! `p_i = π_r ∂_r x_i + (π_θ/r²) ∂_θ x_i + (π_φ/(r² sin²θ)) ∂_φ x_i`, the
//! constraint pair becomes `(r − R, π_r)`. On the shell `r = R`, `π_r = 0`
//! every observable is a function of `(θ, φ, π_θ, π_φ)` and the constrained
//! bracket is the canonical Poisson bracket of those variables.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::error::{Result, RotorError};
use crate::expr::{Expr, Tape};
use crate::geometry::{check_off_poles, hyperspherical_exprs, Chart, ModelParams};

use super::PhaseState;

/// Canonical variable slots: `θ, φ, π_θ, π_φ`.
pub const THETA: usize = 0;
pub const PHI: usize = 1;
pub const PI_THETA: usize = 2;
pub const PI_PHI: usize = 3;

/// Phase-space function of the shell variables with exact derivatives.
#[derive(Debug, Clone)]
pub struct Observable {
    expr: Expr,
    tape: OnceLock<Tape>,
}

impl Observable {
    pub fn new(expr: Expr) -> Self {
        Self { expr, tape: OnceLock::new() }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    fn tape(&self) -> &Tape {
        self.tape.get_or_init(|| Tape::compile(&self.expr))
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self.expr.as_constant() {
            Some(c) => c,
            None => self.tape().eval(z),
        }
    }

    /// Gradient in `(θ, φ, π_θ, π_φ)`.
    pub fn gradient(&self, z: &[f64]) -> [f64; 4] {
        if self.expr.as_constant().is_some() {
            return [0.0; 4];
        }
        let j = self.tape().jet(z);
        [j.d(0), j.d(1), j.d(2), j.d(3)]
    }
}

/// Embedded coordinates and momenta of the 2-sphere as observables.
#[derive(Debug, Clone)]
pub struct CanonicalChart {
    params: ModelParams,
    x: Vec<Expr>,
    p: Vec<Expr>,
}

impl CanonicalChart {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if params.dim() != 3 {
            return Err(RotorError::UnsupportedDimension(params.dim()));
        }
        let r = params.radius();
        let x = hyperspherical_exprs(r, params);
        let pi_t = Expr::var(PI_THETA);
        let pi_p = Expr::var(PI_PHI);
        let sin2 = Expr::var(THETA).sin().powi(2);
        let p = x
            .iter()
            .map(|xi| {
                pi_t.clone() * xi.diff(THETA) * (1.0 / (r * r))
                    + pi_p.clone() * xi.diff(PHI) * (r * r * sin2.clone()).powi(-1)
            })
            .collect();
        Ok(Self { params: *params, x, p })
    }

    /// `x_i`, one-based.
    pub fn x(&self, i: usize) -> Result<Observable> {
        self.component(&self.x, i)
    }

    /// `p_i`, one-based.
    pub fn p(&self, i: usize) -> Result<Observable> {
        self.component(&self.p, i)
    }

    fn component(&self, v: &[Expr], i: usize) -> Result<Observable> {
        if i == 0 || i > 3 {
            return Err(RotorError::IndexOutOfRange { index: i, limit: 3 });
        }
        Ok(Observable::new(v[i - 1].clone()))
    }

    /// Pullback of `Ω₂ = x·p` to the shell.
    pub fn omega2(&self) -> Observable {
        Observable::new(Expr::sum(self.x.iter().zip(&self.p).map(|(a, b)| a.clone() * b.clone())))
    }

    /// Pullback of `Ω₁ = x·x − R²` to the shell.
    pub fn omega1(&self) -> Observable {
        let r = self.params.radius();
        Observable::new(Expr::sum(self.x.iter().map(|a| a.powi(2))) - r * r)
    }

    /// Polynomial of total degree ≤ `degree` in `x_i, p_i` with uniform
    /// coefficients in `[−1, 1]`.
    pub fn random_observable(&self, degree: usize, rng: &mut impl Rng) -> Observable {
        let atoms: Vec<Expr> = self.x.iter().chain(&self.p).cloned().collect();
        let terms = crate::families::monomials(6, degree).into_iter().map(|e| {
            let c: f64 = rng.random_range(-1.0..1.0);
            e.iter().enumerate().fold(Expr::constant(c), |acc, (k, &n)| acc * atoms[k].powi(n as i32))
        });
        Observable::new(Expr::sum(terms))
    }

    /// Uniformly drawn shell point with `θ` at least `margin` from the poles.
    pub fn random_point(&self, rng: &mut impl Rng, margin: f64, momentum_scale: f64) -> PhaseState {
        let q = vec![rng.random_range(margin..PI - margin), rng.random_range(0.0..2.0 * PI)];
        let p = (0..2).map(|_| rng.random_range(-momentum_scale..momentum_scale)).collect();
        PhaseState { chart: Chart::Hyperspherical, q, p, t: 0.0 }
    }

    /// `x` and `p` at a shell point.
    pub fn embedded(&self, point: &PhaseState) -> Result<(Vec<f64>, Vec<f64>)> {
        let z = self.coords(point)?;
        let ev = |v: &[Expr]| v.iter().map(|e| e.eval(&z)).collect::<Vec<f64>>();
        Ok((ev(&self.x), ev(&self.p)))
    }

    fn coords(&self, point: &PhaseState) -> Result<[f64; 4]> {
        if point.chart != Chart::Hyperspherical || point.q.len() != 2 || point.p.len() != 2 {
            return Err(RotorError::Precondition("bracket points are (θ, φ; π_θ, π_φ) on the 2-sphere".into()));
        }
        check_off_poles(&point.q)?;
        Ok([point.q[0], point.q[1], point.p[0], point.p[1]])
    }

    /// Constrained bracket `{A, B}*` at a shell point.
    pub fn dirac_bracket(&self, a: &Observable, b: &Observable, point: &PhaseState) -> Result<f64> {
        let z = self.coords(point)?;
        let ga = a.gradient(&z);
        let gb = b.gradient(&z);
        Ok((ga[THETA] * gb[PI_THETA] - ga[PI_THETA] * gb[THETA]) + (ga[PHI] * gb[PI_PHI] - ga[PI_PHI] * gb[PHI]))
    }

    /// The bracket as an observable, for nested brackets.
    pub fn bracket_observable(&self, a: &Observable, b: &Observable) -> Observable {
        let (ea, eb) = (&a.expr, &b.expr);
        let pair = |q: usize, p: usize| ea.diff(q) * eb.diff(p) - ea.diff(p) * eb.diff(q);
        Observable::new(pair(THETA, PI_THETA) + pair(PHI, PI_PHI))
    }
}

/// Maximum deviation of one bracket family from its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketCheck {
    pub family: String,
    pub samples: usize,
    pub max_deviation: f64,
}

/// Check `{x_i, x_j}* = 0`, `{x_i, p_j}* = δ_ij − x_i x_j/R²` and
/// `{p_i, p_j}* = −(x_i p_j − x_j p_i)/R²` at `samples` random shell points.
pub fn check_bracket_families(params: &ModelParams, samples: usize, seed: u64) -> Result<Vec<BracketCheck>> {
    let chart = CanonicalChart::new(params)?;
    let mut rng = crate::families::rng(seed);
    let xs: Vec<Observable> = (1..=3).map(|i| chart.x(i)).collect::<Result<_>>()?;
    let ps: Vec<Observable> = (1..=3).map(|i| chart.p(i)).collect::<Result<_>>()?;
    let r2 = params.radius() * params.radius();
    let mut worst = [0.0f64; 3];
    for _ in 0..samples {
        let pt = chart.random_point(&mut rng, 0.05, 2.0);
        let (x, p) = chart.embedded(&pt)?;
        for i in 0..3 {
            for j in 0..3 {
                let xx = chart.dirac_bracket(&xs[i], &xs[j], &pt)?;
                let xp = chart.dirac_bracket(&xs[i], &ps[j], &pt)?;
                let pp = chart.dirac_bracket(&ps[i], &ps[j], &pt)?;
                let delta = if i == j { 1.0 } else { 0.0 };
                worst[0] = worst[0].max(xx.abs());
                worst[1] = worst[1].max((xp - (delta - x[i] * x[j] / r2)).abs());
                worst[2] = worst[2].max((pp + (x[i] * p[j] - x[j] * p[i]) / r2).abs());
            }
        }
    }
    Ok(["{x_i,x_j}", "{x_i,p_j}", "{p_i,p_j}"]
        .iter()
        .zip(worst)
        .map(|(f, w)| BracketCheck { family: f.to_string(), samples, max_deviation: w })
        .collect())
}

/// Largest Jacobi-identity residual over random observable triples.
pub fn jacobi_defect(params: &ModelParams, triples: usize, points: usize, seed: u64) -> Result<f64> {
    let chart = CanonicalChart::new(params)?;
    let mut rng = crate::families::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..triples {
        let a = chart.random_observable(2, &mut rng);
        let b = chart.random_observable(2, &mut rng);
        let c = chart.random_observable(2, &mut rng);
        let bc = chart.bracket_observable(&b, &c);
        let ca = chart.bracket_observable(&c, &a);
        let ab = chart.bracket_observable(&a, &b);
        for _ in 0..points {
            let pt = chart.random_point(&mut rng, 0.2, 1.0);
            let s = chart.dirac_bracket(&a, &bc, &pt)?
                + chart.dirac_bracket(&b, &ca, &pt)?
                + chart.dirac_bracket(&c, &ab, &pt)?;
            worst = worst.max(s.abs());
        }
    }
    Ok(worst)
}
