use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, RotorError};
use crate::geometry::ModelParams;
use crate::quadrature::{gauss_jacobi, periodic};

/// Nodes of one polar angle: Gauss points in `u = cos φ` for the weight
/// `(1 − u²)^{(a−1)/2}`, which is `sin^a φ dφ` with `a = D − 1 − k`.
#[derive(Debug, Clone, Serialize)]
pub struct PolarAxis {
    /// Exponent `a` of `sin φ` in the volume density.
    pub weight_exponent: usize,
    pub u: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PolarAxis {
    pub fn new(n: usize, a: usize) -> Result<Self> {
        let r = gauss_jacobi(n, 0.5 * (a as f64 - 1.0))?;
        Ok(Self { weight_exponent: a, u: r.nodes, weights: r.weights })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.u.iter().map(|u| u.acos()).collect()
    }
}

/// Tensor grid over the angle chart: polar axes `φ_1, …, φ_{D−2}` and a
/// uniform azimuth `φ_{D−1}`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralGrid {
    pub params: ModelParams,
    pub polar: Vec<PolarAxis>,
    pub azimuth: usize,
}

/// Grids are only discretized for these dimensions.
pub const SUPPORTED_DIMS: [usize; 3] = [2, 3, 4];

impl SpectralGrid {
    /// Standard grid of resolution `r`: `r` azimuthal nodes for D = 2,
    /// otherwise `r` nodes per polar angle and `2r` in the azimuth.
    pub fn new(p: &ModelParams, resolution: usize) -> Result<Self> {
        let d = p.dim();
        if d == 2 {
            Self::with_counts(p, &[], resolution)
        } else {
            Self::with_counts(p, &vec![resolution; d - 2], 2 * resolution)
        }
    }

    pub fn with_counts(p: &ModelParams, polar: &[usize], azimuth: usize) -> Result<Self> {
        let d = p.dim();
        if !SUPPORTED_DIMS.contains(&d) {
            return Err(RotorError::UnsupportedDimension(d));
        }
        if polar.len() != d - 2 {
            return Err(RotorError::DimensionMismatch { expected: d - 2, got: polar.len() });
        }
        if polar.iter().chain([&azimuth]).any(|&n| n < 4) {
            return Err(RotorError::Config("every grid axis needs at least 4 nodes".into()));
        }
        if !azimuth.is_multiple_of(2) {
            return Err(RotorError::Config(format!("azimuthal node count {azimuth} must be even")));
        }
        let axes =
            polar.iter().enumerate().map(|(k0, &n)| PolarAxis::new(n, d - 2 - k0)).collect::<Result<Vec<_>>>()?;
        Ok(Self { params: *p, polar: axes, azimuth })
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Node count per axis, polar axes first.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.polar.iter().map(|a| a.len()).collect();
        s.push(self.azimuth);
        s
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn azimuth_angles(&self) -> Vec<f64> {
        periodic(self.azimuth).nodes
    }

    /// Angles of every grid point, row-major with the azimuth fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> =
            self.polar.iter().map(|a| a.angles()).chain(std::iter::once(self.azimuth_angles())).collect();
        let mut pts = vec![Vec::new()];
        for axis in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        pts
    }

    /// Quadrature weight of every grid point (surface element included).
    pub fn weights(&self) -> Vec<f64> {
        let axes: Vec<&[f64]> = self.polar.iter().map(|a| a.weights.as_slice()).collect();
        let h = 2.0 * PI / self.azimuth as f64;
        let mut w = vec![self.params.radius().powi(self.dim() as i32 - 1)];
        for axis in axes {
            w = w.iter().flat_map(|&a| axis.iter().map(move |&b| a * b)).collect();
        }
        w.iter().flat_map(|&a| std::iter::repeat_n(a * h, self.azimuth)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_area;

    #[test]
    fn weights_sum_to_area() {
        for d in 2..=4 {
            let p = ModelParams::new(d, 1.3, 1.0).unwrap();
            let g = SpectralGrid::new(&p, 10).unwrap();
            let w = g.weights();
            assert_eq!(w.len(), g.len());
            assert_eq!(g.points().len(), g.len());
            assert!(w.iter().all(|&x| x > 0.0));
            let total: f64 = w.iter().sum();
            assert!((total - sphere_area(&p)).abs() < 1e-10 * sphere_area(&p));
        }
    }

    #[test]
    fn rejects_invalid_grids() {
        let p = ModelParams::unit(5).unwrap();
        assert_eq!(SpectralGrid::new(&p, 8).unwrap_err(), RotorError::UnsupportedDimension(5));
        let p = ModelParams::unit(3).unwrap();
        assert!(SpectralGrid::with_counts(&p, &[8], 9).is_err());
        assert!(SpectralGrid::with_counts(&p, &[3], 8).is_err());
    }
}
