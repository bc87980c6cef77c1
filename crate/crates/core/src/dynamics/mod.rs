//! Classical free motion on the sphere.
//!
//! The reduced chart carries the Hamiltonian `H = ½ p_i g^{ij} p_j` with
//! `g^{ij} = δ_ij − q_i q_j/R²`, integrated by the implicit midpoint rule
//! ([`integrate_reduced`]). The embedded oracle integrates `ẍ = −2λx` with the
//! multiplier eliminated: differentiating `x·x = R²` twice gives
//! `x·ẍ + |ẋ|² = 0`, hence `λ = |ẋ|²/(2R²)` ([`integrate_embedded_oracle`]).
//! [`brackets`] checks the constrained bracket algebra in the canonical
//! angular chart.

pub mod brackets;
mod embedded;
mod reduced;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};
use crate::expr::Tape;
use crate::geometry::{
    chart_gap, curvilinear_prefactors, from_hyperspherical, hyperspherical_exprs, lift, lift_differential, metric,
    norm_sq, Chart, ModelParams,
};

pub use brackets::{check_bracket_families, jacobi_defect, BracketCheck, CanonicalChart, Observable};
pub use embedded::{angular_momenta, integrate_embedded_oracle, multiplier, EmbeddedState, EmbeddedTrajectory};
pub use reduced::{integrate_reduced, integrate_reduced_with, ReducedOptions};

/// Positions and conjugate momenta (unit mass) on one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub chart: Chart,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    /// Validated state. Reduced states must lie inside the chart, angular
    /// states off the poles.
    pub fn new(chart: Chart, q: Vec<f64>, p: Vec<f64>, t: f64, params: &ModelParams) -> Result<Self> {
        let n = match chart {
            Chart::Embedded => params.dim(),
            _ => params.chart_dim(),
        };
        for v in [&q, &p] {
            if v.len() != n {
                return Err(RotorError::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        match chart {
            Chart::ReducedCartesian => {
                chart_gap(&q, params)?;
            }
            Chart::Hyperspherical => {
                curvilinear_prefactors(&q, params)?;
            }
            Chart::Embedded => {}
        }
        Ok(Self { chart, q, p, t })
    }

    fn require(&self, chart: Chart) -> Result<()> {
        if self.chart != chart {
            return Err(RotorError::Precondition(format!("expected a {chart:?} state, got {:?}", self.chart)));
        }
        Ok(())
    }
}

/// `H = ½ p_i g^{ij}(q) p_j` on the reduced chart, `g^{ij} = δ_ij − q_i q_j/R²`.
pub fn hamiltonian_value(s: &PhaseState, params: &ModelParams) -> Result<f64> {
    s.require(Chart::ReducedCartesian)?;
    chart_gap(&s.q, params)?;
    Ok(reduced_energy(&s.q, &s.p, params))
}

pub(crate) fn reduced_energy(q: &[f64], p: &[f64], params: &ModelParams) -> f64 {
    let qp: f64 = q.iter().zip(p).map(|(a, b)| a * b).sum();
    0.5 * (norm_sq(p) - qp * qp / (params.radius() * params.radius()))
}

/// `(Ω₁, Ω₂) = (x·x − R², x·p)`.
pub fn constraint_residuals(x: &[f64], p: &[f64], params: &ModelParams) -> (f64, f64) {
    let r = params.radius();
    let xp = x.iter().zip(p).map(|(a, b)| a * b).sum();
    (norm_sq(x) - r * r, xp)
}

/// `(1/2R²) Σ_k π_k² / Π_{j<k} sin²φ_j` on the constraint shell; for D = 3
/// this is `(π_θ² + π_φ²/sin²θ)/(2R²)`.
pub fn physical_hamiltonian(s: &PhaseState, params: &ModelParams) -> Result<f64> {
    s.require(Chart::Hyperspherical)?;
    let w = curvilinear_prefactors(&s.q, params)?;
    let r2 = params.radius() * params.radius();
    Ok(0.5 * w.iter().zip(&s.p).map(|(w, pi)| w * pi * pi).sum::<f64>() / r2)
}

/// Embedded position and velocity of a reduced state.
pub fn lift_state(s: &PhaseState, params: &ModelParams) -> Result<(Vec<f64>, Vec<f64>)> {
    s.require(Chart::ReducedCartesian)?;
    let x = lift(&s.q, params)?;
    let qdot = reduced_velocity(&s.q, &s.p, params);
    let v = lift_differential(&s.q, params)? * nalgebra::DVector::from_column_slice(&qdot);
    Ok((x, v.as_slice().to_vec()))
}

/// `q̇ = g^{-1} p`.
pub(crate) fn reduced_velocity(q: &[f64], p: &[f64], params: &ModelParams) -> Vec<f64> {
    let qp: f64 = q.iter().zip(p).map(|(a, b)| a * b).sum();
    let r2 = params.radius() * params.radius();
    p.iter().zip(q).map(|(pi, qi)| pi - qp * qi / r2).collect()
}

/// Reduced state of an embedded position and velocity on the upper hemisphere.
pub fn reduce_state(x: &[f64], v: &[f64], t: f64, params: &ModelParams) -> Result<PhaseState> {
    let d = params.dim();
    if x.len() != d || v.len() != d {
        return Err(RotorError::DimensionMismatch { expected: d, got: x.len().min(v.len()) });
    }
    if x[d - 1] <= 0.0 {
        return Err(RotorError::ChartDomain { norm_sq: norm_sq(&x[..d - 1]), radius_sq: params.radius().powi(2) });
    }
    let q = x[..d - 1].to_vec();
    let g = metric(&q, params)?;
    let p = g * nalgebra::DVector::from_column_slice(&v[..d - 1]);
    PhaseState::new(Chart::ReducedCartesian, q, p.as_slice().to_vec(), t, params)
}

/// Map a canonical angular state (angles, conjugate momenta) on the upper
/// hemisphere to the reduced chart through the embedding.
pub fn curvilinear_to_reduced(s: &PhaseState, params: &ModelParams) -> Result<PhaseState> {
    s.require(Chart::Hyperspherical)?;
    let w = curvilinear_prefactors(&s.q, params)?;
    let r = params.radius();
    let x = from_hyperspherical(r, &s.q, params)?;
    // φ̇_k = P_k π_k / R²
    let phidot: Vec<f64> = w.iter().zip(&s.p).map(|(w, pi)| w * pi / (r * r)).collect();
    let d = params.dim();
    let mut v = vec![0.0; d];
    for (a, e) in hyperspherical_exprs(r, params).iter().enumerate() {
        let jet = Tape::compile(e).jet(&s.q);
        v[a] = (0..d - 1).map(|k| jet.d(k) * phidot[k]).sum();
    }
    reduce_state(&x, &v, s.t, params)
}

/// One implicit midpoint step `z₁ = z₀ + dt f((z₀ + z₁)/2)`, solved by
/// fixed-point iteration. Returns `None` when the iteration stalls.
pub(crate) fn midpoint_step(
    z0: &[f64],
    dt: f64,
    tol: f64,
    max_iter: usize,
    f: impl Fn(&[f64]) -> Vec<f64>,
) -> Option<Vec<f64>> {
    let scale = z0.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let mut z1: Vec<f64> = z0.iter().zip(f(z0)).map(|(a, b)| a + dt * b).collect();
    for _ in 0..max_iter {
        let mid: Vec<f64> = z0.iter().zip(&z1).map(|(a, b)| 0.5 * (a + b)).collect();
        let next: Vec<f64> = z0.iter().zip(f(&mid)).map(|(a, b)| a + dt * b).collect();
        let change = next.iter().zip(&z1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        z1 = next;
        if change <= tol * scale {
            return Some(z1);
        }
    }
    None
}

/// Sequence of states from one integrator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<PhaseState>,
}

impl Trajectory {
    /// Columns `t, q…, p…, H, Omega1, Omega2`, with the constraint residuals
    /// of the lifted state.
    pub fn to_csv(&self, params: &ModelParams) -> Result<String> {
        let n = params.chart_dim();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("q{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        header.extend(["H", "Omega1", "Omega2"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for s in &self.states {
            let (x, v) = lift_state(s, params)?;
            let (o1, o2) = constraint_residuals(&x, &v, params);
            let mut row = vec![format!("{:e}", s.t)];
            row.extend(s.q.iter().chain(&s.p).map(|a| format!("{a:e}")));
            row.extend([hamiltonian_value(s, params)?, o1, o2].iter().map(|a| format!("{a:e}")));
            w.write_record(&row).expect("in-memory write");
        }
        Ok(String::from_utf8(w.into_inner().expect("flush")).expect("utf8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trajectory serializes")
    }
}

/// Sup-norm distance between a lifted reduced trajectory and the oracle,
/// compared at matching step indices.
pub fn trajectory_deviation(reduced: &Trajectory, oracle: &EmbeddedTrajectory, params: &ModelParams) -> Result<f64> {
    if reduced.states.len() != oracle.states.len() {
        return Err(RotorError::Precondition("trajectories have different step counts".into()));
    }
    let mut worst = 0.0f64;
    for (s, o) in reduced.states.iter().zip(&oracle.states) {
        let (x, _) = lift_state(s, params)?;
        for (a, b) in x.iter().zip(&o.x) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_examples() {
        let p = ModelParams::unit(3).unwrap();
        let s = PhaseState::new(Chart::ReducedCartesian, vec![0.0, 0.0], vec![1.0, 0.0], 0.0, &p).unwrap();
        assert_eq!(hamiltonian_value(&s, &p).unwrap(), 0.5);
        let s = PhaseState::new(Chart::ReducedCartesian, vec![0.6, 0.0], vec![1.0, 0.0], 0.0, &p).unwrap();
        assert!((hamiltonian_value(&s, &p).unwrap() - 0.32).abs() < 1e-15);
        let s = PhaseState::new(Chart::ReducedCartesian, vec![0.3, 0.1], vec![0.0, 0.0], 0.0, &p).unwrap();
        assert_eq!(hamiltonian_value(&s, &p).unwrap(), 0.0);
        assert!(PhaseState::new(Chart::ReducedCartesian, vec![1.0, 0.2], vec![0.0, 0.0], 0.0, &p).is_err());
    }

    #[test]
    fn constraint_example() {
        let p = ModelParams::unit(3).unwrap();
        assert_eq!(constraint_residuals(&[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &p), (3.0, 2.0));
    }

    #[test]
    fn physical_hamiltonian_examples() {
        let p = ModelParams::unit(3).unwrap();
        let s = PhaseState::new(Chart::Hyperspherical, vec![std::f64::consts::FRAC_PI_2, 0.4], vec![1.0, 2.0], 0.0, &p)
            .unwrap();
        assert!((physical_hamiltonian(&s, &p).unwrap() - 2.5).abs() < 1e-15);
        let s = PhaseState::new(Chart::Hyperspherical, vec![0.7, 0.4], vec![0.0, 0.0], 0.0, &p).unwrap();
        assert_eq!(physical_hamiltonian(&s, &p).unwrap(), 0.0);
        assert!(matches!(
            PhaseState::new(Chart::Hyperspherical, vec![0.0, 0.4], vec![1.0, 0.0], 0.0, &p),
            Err(RotorError::PoleSingularity { angle: 1 })
        ));
    }

    #[test]
    fn physical_hamiltonian_matches_reduced_form() {
        for d in 3..=5 {
            let p = ModelParams::new(d, 1.7, 1.0).unwrap();
            let mut rng = crate::families::rng(d as u64);
            for pt in crate::families::dual_chart_points(40, &p, 11, 0.1) {
                use rand::Rng;
                let pi: Vec<f64> = (0..d - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
                let s = PhaseState::new(Chart::Hyperspherical, pt.angles.clone(), pi, 0.0, &p).unwrap();
                let red = curvilinear_to_reduced(&s, &p).unwrap();
                let a = physical_hamiltonian(&s, &p).unwrap();
                let b = hamiltonian_value(&red, &p).unwrap();
                assert!((a - b).abs() < 1e-12 * a.max(1.0), "D={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn lift_and_reduce_round_trip() {
        let p = ModelParams::new(4, 2.0, 1.0).unwrap();
        let s = PhaseState::new(Chart::ReducedCartesian, vec![0.3, -0.5, 0.9], vec![0.2, 1.1, -0.4], 1.5, &p).unwrap();
        let (x, v) = lift_state(&s, &p).unwrap();
        let (o1, o2) = constraint_residuals(&x, &v, &p);
        assert!(o1.abs() < 1e-14 && o2.abs() < 1e-14);
        let back = reduce_state(&x, &v, 1.5, &p).unwrap();
        for (a, b) in back.p.iter().zip(&s.p) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((0.5 * norm_sq(&v) - hamiltonian_value(&s, &p).unwrap()).abs() < 1e-14);
    }
}
