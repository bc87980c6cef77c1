//! Invariant suites: seeded batteries of checks that report their worst
//! deviation against a tolerance. The CLI `check` command and the test
//! suite both drive these.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{check_bracket_families, jacobi_defect, CanonicalChart};
use crate::error::{Result, RotorError};
use crate::expr::Expr;
use crate::families::{dual_chart_points, harmonic_family, random_polynomial, relative_deviation, rng, SphereFunction};
use crate::geometry::{Chart, ModelParams};
use crate::operators::{
    apply_hamiltonian_cartesian, apply_hamiltonian_curvilinear, apply_l2_over_2r2, hermiticity_defect, inner_product,
    OperatorTag, TestFunction,
};
use crate::quadrature::QuadratureSpec;

/// Names accepted by [`Suite::from_str`].
pub const SUITE_NAMES: [&str; 4] = ["chart-equivalence", "hermiticity", "angular-momentum", "dirac-brackets"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ChartEquivalence,
    Hermiticity,
    AngularMomentum,
    DiracBrackets,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ChartEquivalence => SUITE_NAMES[0],
            Self::Hermiticity => SUITE_NAMES[1],
            Self::AngularMomentum => SUITE_NAMES[2],
            Self::DiracBrackets => SUITE_NAMES[3],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = RotorError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chart-equivalence" => Ok(Self::ChartEquivalence),
            "hermiticity" => Ok(Self::Hermiticity),
            "angular-momentum" => Ok(Self::AngularMomentum),
            "dirac-brackets" => Ok(Self::DiracBrackets),
            _ => Err(RotorError::Config(format!("unknown suite '{s}' (expected one of {})", SUITE_NAMES.join(", ")))),
        }
    }
}

/// Sample counts, seed and tolerance of a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteOptions {
    /// Test functions (chart suites) or shell points (brackets).
    pub samples: usize,
    /// Points per test function (chart suites) or Jacobi triples (brackets).
    pub points: usize,
    pub seed: u64,
    /// Quadrature resolution of the hermiticity suite.
    pub resolution: usize,
    /// Highest harmonic degree in the chart suites.
    pub max_degree: usize,
    /// Overrides the suite's default tolerance.
    pub tolerance: Option<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { samples: 100, points: 100, seed: 1, resolution: 64, max_degree: 3, tolerance: None }
    }
}

impl SuiteOptions {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.points == 0 {
            return Err(RotorError::Config("suite sample counts must be positive".into()));
        }
        if self.max_degree == 0 {
            return Err(RotorError::Config("max_degree must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(RotorError::Config(format!("tolerance {t} must be positive")));
            }
        }
        QuadratureSpec::new(self.resolution).validate()
    }
}

/// Direction of a row's comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    /// Deviation must stay below the tolerance.
    Below,
    /// Control: deviation must exceed the tolerance.
    Above,
}

/// One checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub expect: Expect,
    pub pass: bool,
}

impl SuiteRow {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64, expect: Expect) -> Self {
        let pass = match expect {
            Expect::Below => deviation < tolerance,
            Expect::Above => deviation > tolerance,
        };
        Self { name: name.into(), deviation, tolerance, expect, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    /// Worst deviation among rows that must stay small.
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().filter(|r| r.expect == Expect::Below).map(|r| r.deviation).fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Default tolerance of each suite.
pub fn default_tolerance(suite: Suite) -> f64 {
    match suite {
        Suite::ChartEquivalence | Suite::AngularMomentum | Suite::DiracBrackets => 1e-10,
        Suite::Hermiticity => 1e-8,
    }
}

pub fn run_suite(suite: Suite, p: &ModelParams, opts: &SuiteOptions) -> Result<SuiteReport> {
    opts.validate()?;
    let tol = opts.tolerance.unwrap_or(default_tolerance(suite));
    let rows = match suite {
        Suite::ChartEquivalence => chart_equivalence(p, opts, tol)?,
        Suite::AngularMomentum => angular_momentum(p, opts, tol)?,
        Suite::Hermiticity => hermiticity(p, opts, tol)?,
        Suite::DiracBrackets => dirac_brackets(p, opts, tol)?,
    };
    Ok(SuiteReport { suite, rows })
}

/// `ħ² l(l + D − 2)/(2R²)`, the Hamiltonian eigenvalue of a degree-`l` harmonic.
fn harmonic_energy(l: usize, p: &ModelParams) -> f64 {
    let l = l as f64;
    p.energy_unit() * l * (l + p.dim() as f64 - 2.0)
}

/// Floor for relative errors of `Ĥ f`: the largest value `|Ĥ f|` can take.
fn energy_floor(f: &SphereFunction, p: &ModelParams) -> f64 {
    f.scale * harmonic_energy(f.degree.max(1), p)
}

fn chart_equivalence(p: &ModelParams, opts: &SuiteOptions, tol: f64) -> Result<Vec<SuiteRow>> {
    let family = harmonic_family(opts.samples, opts.max_degree, p, opts.seed);
    let points = dual_chart_points(opts.points, p, opts.seed.wrapping_add(1), 0.05);
    let mut charts = 0.0f64;
    let mut eigen = 0.0f64;
    for f in &family {
        let red = f.pullback(Chart::ReducedCartesian, p);
        let hyp = f.pullback(Chart::Hyperspherical, p);
        let floor = energy_floor(f, p);
        let e = harmonic_energy(f.degree, p);
        for pt in &points {
            let a = apply_hamiltonian_cartesian(&red, &pt.reduced, p)?.re;
            let b = apply_hamiltonian_curvilinear(&hyp, &pt.angles, p)?.re;
            charts = charts.max(relative_deviation(a, b, floor));
            eigen = eigen.max(relative_deviation(a, e * red.eval(&pt.reduced), floor));
        }
    }
    Ok(vec![
        SuiteRow::new("cartesian vs curvilinear", charts, tol, Expect::Below),
        SuiteRow::new("cartesian vs harmonic eigenvalue", eigen, tol, Expect::Below),
    ])
}

fn angular_momentum(p: &ModelParams, opts: &SuiteOptions, tol: f64) -> Result<Vec<SuiteRow>> {
    let family = harmonic_family(opts.samples, opts.max_degree, p, opts.seed);
    let points = dual_chart_points(opts.points, p, opts.seed.wrapping_add(1), 0.05);
    // random polynomials are not eigenfunctions, so they test the identity
    // beyond the harmonic subspace
    let mut r = rng(opts.seed.wrapping_add(2));
    let polys: Vec<SphereFunction> = (0..opts.samples).map(|_| random_polynomial(opts.max_degree, p, &mut r)).collect();
    let mut worst = [0.0f64; 2];
    for (k, set) in [&family, &polys].into_iter().enumerate() {
        for f in set {
            let red = f.pullback(Chart::ReducedCartesian, p);
            let floor = energy_floor(f, p);
            for pt in &points {
                let h = apply_hamiltonian_cartesian(&red, &pt.reduced, p)?.re;
                let l2 = apply_l2_over_2r2(&red, &pt.reduced, p)?.re;
                worst[k] = worst[k].max(relative_deviation(h, l2, floor));
            }
        }
    }
    Ok(vec![
        SuiteRow::new("L^2/(2R^2) vs hamiltonian, harmonics", worst[0], tol, Expect::Below),
        SuiteRow::new("L^2/(2R^2) vs hamiltonian, polynomials", worst[1], tol, Expect::Below),
    ])
}

/// Smooth function pair for hermiticity checks, each normalized to unit
/// norm under `spec`. On the reduced chart the functions carry a factor
/// `y_D⁴` so they vanish at the chart boundary.
pub fn hermiticity_pair(
    chart: Chart,
    p: &ModelParams,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<(TestFunction, TestFunction)> {
    let mut r = rng(seed);
    let mut make = || -> Result<TestFunction> {
        let f = random_polynomial(3, p, &mut r);
        let mut e = f.embedded;
        if chart == Chart::ReducedCartesian {
            e = e * (Expr::var(p.dim() - 1) / p.radius()).powi(4);
        }
        let g = SphereFunction { embedded: e, scale: 1.0, degree: f.degree }.pullback(chart, p);
        let n = inner_product(&g, &g, chart, p, spec)?.re.sqrt();
        Ok(TestFunction::new((1.0 / n) * g.expr().clone(), chart))
    };
    let f = make()?;
    let h = make()?;
    Ok((f, h))
}

fn hermiticity(p: &ModelParams, opts: &SuiteOptions, tol: f64) -> Result<Vec<SuiteRow>> {
    let spec = QuadratureSpec::new(opts.resolution);
    let reduced = hermiticity_pair(Chart::ReducedCartesian, p, opts.seed, &spec)?;
    let angular = hermiticity_pair(Chart::Hyperspherical, p, opts.seed, &spec)?;
    let pair = |chart: Chart| {
        if chart == Chart::ReducedCartesian {
            &reduced
        } else {
            &angular
        }
    };
    let mut rows = Vec::new();
    for op in OperatorTag::all_physical(p.dim()) {
        let (f, h) = pair(op.chart());
        rows.push(SuiteRow::new(op.name(), hermiticity_defect(&op, f, h, p, &spec)?, tol, Expect::Below));
    }
    let (f, h) = pair(Chart::Hyperspherical);
    let mult = OperatorTag::Multiply(f.clone());
    rows.push(SuiteRow::new("control: multiply", hermiticity_defect(&mult, f, h, p, &spec)?, 1e-14, Expect::Below));
    if p.dim() > 2 {
        // on the circle the unsymmetrized form coincides with the true one.
        // A fixed zonal pair keeps the control away from accidental
        // cancellation of the dropped first-order term.
        let zonal = SphereFunction { embedded: (Expr::var(p.dim() - 1) / p.radius()).powi(2), scale: 1.0, degree: 2 }
            .pullback(Chart::Hyperspherical, p);
        let one = TestFunction::constant(1.0, Chart::Hyperspherical);
        let d = hermiticity_defect(&OperatorTag::UnsymmetrizedLaplacian, &zonal, &one, p, &spec)?;
        rows.push(SuiteRow::new("control: unsymmetrized laplacian", d, 1e-3, Expect::Above));
    }
    Ok(rows)
}

/// Largest `|{A, B}* + {B, A}*|` over random observables and points.
pub fn antisymmetry_defect(p: &ModelParams, samples: usize, seed: u64) -> Result<f64> {
    let chart = CanonicalChart::new(p)?;
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = chart.random_observable(2, &mut r);
        let b = chart.random_observable(2, &mut r);
        let pt = chart.random_point(&mut r, 0.05, 2.0);
        worst = worst.max((chart.dirac_bracket(&a, &b, &pt)? + chart.dirac_bracket(&b, &a, &pt)?).abs());
    }
    Ok(worst)
}

fn dirac_brackets(p: &ModelParams, opts: &SuiteOptions, tol: f64) -> Result<Vec<SuiteRow>> {
    let mut rows: Vec<SuiteRow> = check_bracket_families(p, opts.samples, opts.seed)?
        .into_iter()
        .map(|c| SuiteRow::new(c.family, c.max_deviation, tol, Expect::Below))
        .collect();
    // exact antisymmetry: the tolerance is the smallest positive number
    let anti = antisymmetry_defect(p, opts.samples, opts.seed.wrapping_add(1))?;
    rows.push(SuiteRow {
        name: "antisymmetry".into(),
        deviation: anti,
        tolerance: 0.0,
        expect: Expect::Below,
        pass: anti == 0.0,
    });
    let jac = jacobi_defect(p, opts.points.min(50), 4, opts.seed.wrapping_add(2))?;
    rows.push(SuiteRow::new("jacobi", jac, tol.max(1e-9), Expect::Below));
    Ok(rows)
}
