use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};
use crate::geometry::{norm_sq, Chart, ModelParams};

use super::{midpoint_step, reduced_velocity, PhaseState, Trajectory};

/// Settings of the reduced-chart integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedOptions {
    /// Minimum allowed distance `R − |q|`, as a fraction of `R`.
    pub margin: f64,
    /// Fixed-point tolerance of the implicit step.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ReducedOptions {
    fn default() -> Self {
        Self { margin: 0.05, tol: 1e-13, max_iter: 100 }
    }
}

/// Implicit midpoint integration of `q̇ = g^{-1}p`, `ṗ = −∂H/∂q` from `s0`
/// over `[t0, t0 + t_end]` with the default options.
pub fn integrate_reduced(s0: &PhaseState, t_end: f64, dt: f64, params: &ModelParams) -> Result<Trajectory> {
    integrate_reduced_with(s0, t_end, dt, params, &ReducedOptions::default())
}

pub fn integrate_reduced_with(
    s0: &PhaseState,
    t_end: f64,
    dt: f64,
    params: &ModelParams,
    opts: &ReducedOptions,
) -> Result<Trajectory> {
    if s0.chart != Chart::ReducedCartesian {
        return Err(RotorError::Precondition(format!("reduced integration needs a reduced state, got {:?}", s0.chart)));
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(RotorError::Config(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    let n = s0.q.len();
    let r = params.radius();
    let limit = r * (1.0 - opts.margin);
    let steps = (t_end / dt).round() as usize;
    let rhs = |z: &[f64]| {
        let (q, p) = z.split_at(n);
        // H = ½(|p|² − (q·p)²/R²): ṗ = (q·p) p / R²
        let qp: f64 = q.iter().zip(p).map(|(a, b)| a * b).sum();
        let mut out = reduced_velocity(q, p, params);
        out.extend(p.iter().map(|pi| qp * pi / (r * r)));
        out
    };
    let mut z: Vec<f64> = s0.q.iter().chain(&s0.p).copied().collect();
    let mut states = vec![s0.clone()];
    for k in 0..steps {
        let t = s0.t + k as f64 * dt;
        if norm_sq(&z[..n]).sqrt() > limit {
            return Err(RotorError::ChartMargin { time: t });
        }
        z = midpoint_step(&z, dt, opts.tol, opts.max_iter, rhs).ok_or(RotorError::StepSize { time: t })?;
        let q = z[..n].to_vec();
        if norm_sq(&q).sqrt() > limit {
            return Err(RotorError::ChartMargin { time: t + dt });
        }
        states.push(PhaseState {
            chart: Chart::ReducedCartesian,
            q,
            p: z[n..].to_vec(),
            t: s0.t + (k + 1) as f64 * dt,
        });
    }
    Ok(Trajectory { states })
}
