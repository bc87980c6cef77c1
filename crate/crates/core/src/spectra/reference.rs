use serde::Serialize;

use crate::error::{Result, RotorError};
use crate::geometry::ModelParams;

/// Largest angular level served by [`reference_spectrum`].
pub const MAX_LEVEL: usize = 20;

/// One level of the closed-form rotor spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub l: usize,
    pub energy: f64,
    pub multiplicity: usize,
}

fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Dimension of the degree-`l` spherical harmonics in `d` variables,
/// `C(d+l−1, l) − C(d+l−3, l−2)`.
pub fn harmonic_dimension(d: usize, l: usize) -> usize {
    let (d, l) = (d as i64, l as i64);
    (binomial(d + l - 1, l) - binomial(d + l - 3, l - 2)) as usize
}

/// Levels `ħ² l(l+D−2)/(2R²)` for `l = 0..=l_max`.
pub fn reference_spectrum(l_max: usize, p: &ModelParams) -> Result<Vec<Level>> {
    if l_max > MAX_LEVEL {
        return Err(RotorError::InvalidParams(format!("l_max = {l_max} exceeds {MAX_LEVEL}")));
    }
    let d = p.dim();
    Ok((0..=l_max)
        .map(|l| Level {
            l,
            energy: p.energy_unit() * (l * (l + d - 2)) as f64,
            multiplicity: harmonic_dimension(d, l),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::monomials;
    use nalgebra::DMatrix;

    /// Kernel dimension of the Laplacian from degree-l to degree-(l−2) forms.
    fn brute_force_dimension(d: usize, l: usize) -> usize {
        let src: Vec<Vec<usize>> = monomials(d, l).into_iter().filter(|e| e.iter().sum::<usize>() == l).collect();
        if l < 2 {
            return src.len();
        }
        let dst: Vec<Vec<usize>> =
            monomials(d, l - 2).into_iter().filter(|e| e.iter().sum::<usize>() == l - 2).collect();
        let mut lap = DMatrix::<f64>::zeros(dst.len(), src.len());
        for (c, e) in src.iter().enumerate() {
            for i in 0..d {
                if e[i] >= 2 {
                    let mut t = e.clone();
                    t[i] -= 2;
                    let r = dst.iter().position(|x| *x == t).unwrap();
                    lap[(r, c)] += (e[i] * (e[i] - 1)) as f64;
                }
            }
        }
        src.len() - lap.rank(1e-9)
    }

    #[test]
    fn multiplicities_match_brute_force() {
        for d in 2..=6 {
            for l in 0..=5 {
                assert_eq!(harmonic_dimension(d, l), brute_force_dimension(d, l), "D={d} l={l}");
            }
        }
    }

    #[test]
    fn spec_levels() {
        let p = ModelParams::unit(3).unwrap();
        let s = reference_spectrum(3, &p).unwrap();
        assert_eq!(s[1], Level { l: 1, energy: 1.0, multiplicity: 3 });
        let p2 = ModelParams::unit(2).unwrap();
        assert_eq!(reference_spectrum(0, &p2).unwrap()[0], Level { l: 0, energy: 0.0, multiplicity: 1 });
        let p4 = ModelParams::unit(4).unwrap();
        assert_eq!(reference_spectrum(2, &p4).unwrap()[2], Level { l: 2, energy: 4.0, multiplicity: 9 });
        let p10 = ModelParams::new(10, 2.0, 0.5).unwrap();
        assert!(reference_spectrum(20, &p10).is_ok());
        assert!(reference_spectrum(21, &p10).is_err());
    }
}
