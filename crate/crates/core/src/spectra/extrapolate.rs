//! Richardson extrapolation in the grid spacing with a fitted order.

use serde::Serialize;

use crate::error::{Result, RotorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtrapolationStatus {
    /// Successive values already agree; the finest value is returned.
    Converged,
    Extrapolated,
    /// Differences change sign or no order fits; the finest value is returned.
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
    pub order: Option<f64>,
    pub status: ExtrapolationStatus,
}

/// Successive differences below `tol · max(1, |v|)` count as converged.
pub const CONVERGED_TOL: f64 = 1e-11;

/// Extrapolate `values[i]` measured at spacings `h[i]` (decreasing) to
/// `h → 0`, fitting `v(h) = v* + C h^p` through the last three samples.
pub fn richardson(h: &[f64], values: &[f64]) -> Result<Extrapolated> {
    if h.len() != values.len() || h.len() < 3 {
        return Err(RotorError::Precondition("extrapolation needs at least three resolutions".into()));
    }
    let n = h.len();
    let (h1, h2, h3) = (h[n - 3], h[n - 2], h[n - 1]);
    if !(h1 > h2 && h2 > h3 && h3 > 0.0) {
        return Err(RotorError::Precondition("spacings must decrease strictly".into()));
    }
    let (v1, v2, v3) = (values[n - 3], values[n - 2], values[n - 1]);
    let d12 = v1 - v2;
    let d23 = v2 - v3;
    let tol = CONVERGED_TOL * v3.abs().max(1.0);
    if d12.abs() <= tol && d23.abs() <= tol {
        return Ok(Extrapolated { value: v3, error: d23.abs(), order: None, status: ExtrapolationStatus::Converged });
    }
    let flagged = Extrapolated { value: v3, error: d23.abs(), order: None, status: ExtrapolationStatus::NonMonotone };
    if d12 * d23 <= 0.0 {
        return Ok(flagged);
    }
    let ratio = d12 / d23;
    let g = |p: f64| (h1.powf(p) - h2.powf(p)) / (h2.powf(p) - h3.powf(p)) - ratio;
    let (mut lo, mut hi) = (1e-3, 30.0);
    if g(lo) * g(hi) > 0.0 {
        return Ok(flagged);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let value = v3 + (v3 - v2) / ((h2 / h3).powf(p) - 1.0);
    Ok(Extrapolated { value, error: (value - v3).abs(), order: Some(p), status: ExtrapolationStatus::Extrapolated })
}
