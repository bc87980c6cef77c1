use serde::Serialize;

use crate::error::{Result, RotorError};
use crate::geometry::{norm_sq, ModelParams};

use super::midpoint_step;

/// Embedded position and velocity (unit mass, so velocity is momentum).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedTrajectory {
    pub states: Vec<EmbeddedState>,
}

/// Lagrange multiplier of the constraint force `−2λx`: `λ = |ẋ|²/(2R²)`.
pub fn multiplier(v: &[f64], params: &ModelParams) -> f64 {
    norm_sq(v) / (2.0 * params.radius() * params.radius())
}

/// `L_αβ = x_α p_β − x_β p_α` for `α < β`, in lexicographic order.
pub fn angular_momenta(x: &[f64], p: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in a + 1..d {
            out.push(x[a] * p[b] - x[b] * p[a]);
        }
    }
    out
}

/// Integrate `ẍ = −(|ẋ|²/R²) x` with implicit midpoint steps, projecting
/// the position back to the sphere and the velocity onto its tangent space
/// after every step.
pub fn integrate_embedded_oracle(
    x0: &[f64],
    v0: &[f64],
    t_end: f64,
    dt: f64,
    params: &ModelParams,
) -> Result<EmbeddedTrajectory> {
    let d = params.dim();
    if x0.len() != d || v0.len() != d {
        return Err(RotorError::DimensionMismatch {
            expected: d,
            got: if x0.len() != d { x0.len() } else { v0.len() },
        });
    }
    let r = params.radius();
    let r2 = r * r;
    let off_sphere = (norm_sq(x0) - r2).abs();
    let xv: f64 = x0.iter().zip(v0).map(|(a, b)| a * b).sum();
    if off_sphere > 1e-12 * r2 || xv.abs() > 1e-12 * r * norm_sq(v0).sqrt().max(1.0) {
        return Err(RotorError::Precondition(format!(
            "initial data must satisfy |x| = R and x.v = 0 (got |x|^2 - R^2 = {off_sphere:e}, x.v = {xv:e})"
        )));
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(RotorError::Config(format!("need dt > 0 and T >= 0, got dt = {dt}, T = {t_end}")));
    }
    let rhs = |z: &[f64]| {
        let (x, v) = z.split_at(d);
        let c = 2.0 * multiplier(v, params);
        let mut out = v.to_vec();
        out.extend(x.iter().map(|xi| -c * xi));
        out
    };
    let steps = (t_end / dt).round() as usize;
    let mut z: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let mut states = vec![EmbeddedState { t: 0.0, x: x0.to_vec(), v: v0.to_vec() }];
    for k in 0..steps {
        z = midpoint_step(&z, dt, 1e-13, 100, rhs).ok_or(RotorError::StepSize { time: k as f64 * dt })?;
        let (x, v) = z.split_at_mut(d);
        let scale = r / norm_sq(x).sqrt();
        x.iter_mut().for_each(|a| *a *= scale);
        let radial: f64 = x.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>() / r2;
        v.iter_mut().zip(x.iter()).for_each(|(b, a)| *b -= radial * a);
        states.push(EmbeddedState { t: (k + 1) as f64 * dt, x: x.to_vec(), v: v.to_vec() });
    }
    Ok(EmbeddedTrajectory { states })
}
