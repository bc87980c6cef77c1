//! Discretization of the angular Laplacian.
//!
//! The operator separates: the azimuth is diagonalized by Fourier modes `m`,
//! and each polar angle, given the eigenvalue `Λ` of the angles inside it,
//! reduces to the one-dimensional problem
//!
//! ```text
//! −sin^{−a}φ ∂_φ(sin^a φ ∂_φ ψ) + Λ ψ / sin²φ = μ ψ.
//! ```
//!
//! In `u = cos φ` we write `ψ = (1 − u²)^{L/2} q` with `L` the label of the
//! inner mode and expand `q` in the first `N` orthonormal polynomials for the
//! weight `(1 − u²)^β`, `β = (a−1)/2 + L`. With `s = 1 − u²` the quadratic
//! form becomes
//!
//! ```text
//! ∫ s^β (s q'v' + (Λ − L(L+a−1)) q v / s) du + L(L+a) ∫ s^β q v du,
//! ```
//!
//! whose mass part is the identity and whose stiffness part is a polynomial
//! of degree `2N − 2`, integrated exactly by the `N`-point Gauss rule of the
//! same weight. The second term vanishes for resolved inner modes.
//!
//! On the tensor grid each sector acts through its eigenpairs: the sampled
//! eigenfunctions, ordered by eigenvalue and orthonormalized in the grid
//! weights, span the sector's slice of grid space. Low modes are already
//! orthonormal in the grid weights, so they pass through unchanged and the
//! grid operator reproduces them exactly.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, RotorError};
use crate::quadrature::{gauss_jacobi, jacobi_mass, jacobi_recurrence};

use super::grid::{PolarAxis, SpectralGrid, SUPPORTED_DIMS};

/// Orthonormal polynomials `p_0, …, p_{n−1}` for the weight `(1 − u²)^β`
/// and their derivatives at `x`, as `len(x) × n` matrices.
pub fn orthonormal_polynomials(n: usize, beta: f64, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = jacobi_recurrence(n, beta);
    let p0 = 1.0 / jacobi_mass(beta).sqrt();
    let mut p = DMatrix::zeros(x.len(), n);
    let mut dp = DMatrix::zeros(x.len(), n);
    for (i, &u) in x.iter().enumerate() {
        p[(i, 0)] = p0;
        for k in 0..n - 1 {
            let (prev, dprev) = if k == 0 { (0.0, 0.0) } else { (b[k] * p[(i, k - 1)], b[k] * dp[(i, k - 1)]) };
            p[(i, k + 1)] = (u * p[(i, k)] - prev) / b[k + 1];
            dp[(i, k + 1)] = (p[(i, k)] + u * dp[(i, k)] - dprev) / b[k + 1];
        }
    }
    (p, dp)
}

/// Symmetric sector matrix in the orthonormal basis (eigenvalues `μ`, in
/// units of `ħ²/(2R²)`) for a polar angle with density `sin^a φ`, `n`
/// basis functions, inner label `label` and inner eigenvalue `lambda`.
pub fn sector_block(a: usize, n: usize, label: usize, lambda: f64) -> Result<DMatrix<f64>> {
    let l = label as f64;
    let beta = 0.5 * (a as f64 - 1.0) + l;
    let rule = gauss_jacobi(n, beta)?;
    let (p, dp) = orthonormal_polynomials(n, beta, &rule.nodes);
    let corr = lambda - l * (l + a as f64 - 1.0);
    let stiff: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(u, w)| w * (1.0 - u * u)).collect();
    let lower: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(u, w)| corr * w / (1.0 - u * u)).collect();
    let shift = l * (l + a as f64);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let mut acc = if i == j { shift } else { 0.0 };
        for r in 0..n {
            acc += stiff[r] * dp[(r, i)] * dp[(r, j)];
            if corr != 0.0 {
                acc += lower[r] * p[(r, i)] * p[(r, j)];
            }
        }
        acc
    }))
}

/// Eigenpairs of a sector and its action on half-weighted grid values.
#[derive(Debug)]
struct GridBlock {
    values: DVector<f64>,
    /// Orthonormal columns: sampled eigenfunctions times `√w`.
    vectors: DMatrix<f64>,
}

impl GridBlock {
    fn new(axis: &PolarAxis, label: usize, lambda: f64) -> Result<Self> {
        let n = axis.len();
        let a = axis.weight_exponent;
        let e = SymmetricEigen::new(sector_block(a, n, label, lambda)?);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
        let values = DVector::from_iterator(n, idx.iter().map(|&i| e.eigenvalues[i]));
        let coef = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, idx[c])]);
        let beta = 0.5 * (a as f64 - 1.0) + label as f64;
        let (p, _) = orthonormal_polynomials(n, beta, &axis.u);
        let mut sampled = p * coef;
        for (g, (u, w)) in axis.u.iter().zip(&axis.weights).enumerate() {
            let f = w.sqrt() * (1.0 - u * u).powf(0.5 * label as f64);
            sampled.row_mut(g).scale_mut(f);
        }
        // Gram-Schmidt in eigenvalue order keeps the span of the lowest modes
        let qr = sampled.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for c in 0..n {
            if r[(c, c)] < 0.0 {
                q.column_mut(c).neg_mut();
            }
        }
        Ok(Self { values, vectors: q })
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.vectors.tr_mul(x).component_mul(&self.values);
        &self.vectors * c
    }
}

/// Orthogonal real Fourier transform on `n` (even) equispaced nodes and the
/// `|m|` of each row: `1`, `cos mφ`, `sin mφ`, …, Nyquist.
pub fn fourier_basis(n: usize) -> (DMatrix<f64>, Vec<usize>) {
    let h = 2.0 * PI / n as f64;
    let nf = n as f64;
    let mut f = DMatrix::zeros(n, n);
    let mut modes = Vec::with_capacity(n);
    for j in 0..n {
        f[(0, j)] = 1.0 / nf.sqrt();
        f[(n - 1, j)] = if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt();
    }
    modes.push(0);
    for m in 1..n / 2 {
        for j in 0..n {
            // reduce the phase first so large m j keeps full accuracy
            let t = ((m * j) % n) as f64 * h;
            f[(2 * m - 1, j)] = (2.0 / nf).sqrt() * t.cos();
            f[(2 * m, j)] = (2.0 / nf).sqrt() * t.sin();
        }
        modes.push(m);
        modes.push(m);
    }
    modes.push(n / 2);
    (f, modes)
}

/// Fourier spectral second-derivative matrix on `n` (even) periodic nodes.
pub fn fourier_second_derivative(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -PI * PI / (3.0 * h * h) - 1.0 / 6.0
        } else {
            let k = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            -sign / (2.0 * (k * h / 2.0).sin().powi(2))
        }
    })
}

/// A separable block of the operator with its lower eigenvalue bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    /// `(|m|)` for D = 3, `(|m|, n)` for D = 4, empty for D = 2.
    pub label: Vec<usize>,
    /// Number of Fourier rows sharing the block (2 for `0 < |m| < N/2`).
    pub multiplicity: usize,
    /// `L(L + a)`: no eigenvalue of the block lies below it.
    pub bound: f64,
}

/// Discretized Hamiltonian on a [`SpectralGrid`].
///
/// The symmetric form acts on half-weighted values `y = √w ψ` and is
/// dimensionless (eigenvalues `μ`); [`GridOperator::apply`] acts on plain
/// samples `ψ` and returns energies.
#[derive(Debug)]
pub struct GridOperator {
    grid: SpectralGrid,
    fourier: DMatrix<f64>,
    modes: Vec<usize>,
    /// D = 3: block per |m|. D = 4: outer block per (|m|, n), built on demand.
    outer: Vec<Vec<OnceLock<GridBlock>>>,
    /// D = 4 only: inner (φ_2) block per |m|.
    inner: Vec<OnceLock<GridBlock>>,
    sqrt_w: Vec<f64>,
}

/// Build the grid operator. Only D ∈ {2, 3, 4} is discretized.
pub fn assemble(grid: &SpectralGrid) -> Result<GridOperator> {
    let d = grid.dim();
    if !SUPPORTED_DIMS.contains(&d) {
        return Err(RotorError::UnsupportedDimension(d));
    }
    let (fourier, modes) = fourier_basis(grid.azimuth);
    let m_count = grid.azimuth / 2 + 1;
    let (outer, inner) = match d {
        2 => (Vec::new(), Vec::new()),
        3 => ((0..m_count).map(|_| vec![OnceLock::new()]).collect(), Vec::new()),
        _ => {
            let n2 = grid.polar[1].len();
            (
                (0..m_count).map(|_| (0..n2).map(|_| OnceLock::new()).collect()).collect(),
                (0..m_count).map(|_| OnceLock::new()).collect(),
            )
        }
    };
    let sqrt_w = grid.weights().iter().map(|w| w.sqrt()).collect();
    Ok(GridOperator { grid: grid.clone(), fourier, modes, outer, inner, sqrt_w })
}

impl GridOperator {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// `ħ²/(2R²)`, the factor turning `μ` into energies.
    pub fn energy_unit(&self) -> f64 {
        self.grid.params.energy_unit()
    }

    /// All separable blocks with their multiplicities and lower bounds.
    pub fn sectors(&self) -> Vec<Sector> {
        let nyquist = self.grid.azimuth / 2;
        let mult = |m: usize| if m == 0 || m == nyquist { 1 } else { 2 };
        match self.grid.dim() {
            2 => {
                (0..=nyquist).map(|m| Sector { label: vec![m], multiplicity: mult(m), bound: (m * m) as f64 }).collect()
            }
            3 => (0..=nyquist)
                .map(|m| Sector { label: vec![m], multiplicity: mult(m), bound: (m * (m + 1)) as f64 })
                .collect(),
            _ => {
                let n2 = self.grid.polar[1].len();
                let mut out = Vec::new();
                for m in 0..=nyquist {
                    for n in 0..n2 {
                        let l = (m + n) as f64;
                        // the inner eigenvalue is L(L+1) up to rounding, so the block starts at L(L+2)
                        out.push(Sector {
                            label: vec![m, n],
                            multiplicity: mult(m),
                            bound: l * (l + 2.0) - 1e-9 * l * l,
                        });
                    }
                }
                out
            }
        }
    }

    /// The symmetric block of a sector in its orthonormal basis (eigenvalues `μ`).
    pub fn sector_matrix(&self, s: &Sector) -> Result<DMatrix<f64>> {
        let m = s.label[0];
        match self.grid.dim() {
            2 => Ok(DMatrix::from_element(1, 1, (m * m) as f64)),
            3 => sector_block(self.grid.polar[0].weight_exponent, self.grid.polar[0].len(), m, (m * m) as f64),
            _ => {
                let lam = self.inner_block(m)?.values[s.label[1]];
                sector_block(self.grid.polar[0].weight_exponent, self.grid.polar[0].len(), m + s.label[1], lam)
            }
        }
    }

    fn block3(&self, m: usize) -> Result<&GridBlock> {
        get_or_try(&self.outer[m][0], || GridBlock::new(&self.grid.polar[0], m, (m * m) as f64))
    }

    fn inner_block(&self, m: usize) -> Result<&GridBlock> {
        get_or_try(&self.inner[m], || GridBlock::new(&self.grid.polar[1], m, (m * m) as f64))
    }

    fn block4(&self, m: usize, n: usize) -> Result<&GridBlock> {
        let lam = self.inner_block(m)?.values[n];
        get_or_try(&self.outer[m][n], || GridBlock::new(&self.grid.polar[0], m + n, lam))
    }

    /// Build every block up front so that later applications cannot fail.
    pub fn prepare(&self) -> Result<()> {
        let m_count = self.grid.azimuth / 2 + 1;
        match self.grid.dim() {
            2 => {}
            3 => {
                for m in 0..m_count {
                    self.block3(m)?;
                }
            }
            _ => {
                for m in 0..m_count {
                    for n in 0..self.grid.polar[1].len() {
                        self.block4(m, n)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Symmetric operator on half-weighted values (dimensionless).
    ///
    /// # Panics
    /// If `y` has the wrong length or a block cannot be built; call
    /// [`GridOperator::prepare`] first to surface the latter as an error.
    pub fn apply_symmetric(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim());
        let n3 = self.grid.azimuth;
        let rows = y.len() / n3;
        // azimuthal transform of every row
        let mut z = vec![0.0; y.len()];
        for r in 0..rows {
            let v = DVector::from_column_slice(&y[r * n3..(r + 1) * n3]);
            let t = &self.fourier * v;
            z[r * n3..(r + 1) * n3].copy_from_slice(t.as_slice());
        }
        match self.grid.dim() {
            2 => {
                for (k, &m) in self.modes.iter().enumerate() {
                    z[k] *= (m * m) as f64;
                }
            }
            3 => {
                let n1 = rows;
                for (k, &m) in self.modes.iter().enumerate() {
                    let col = DVector::from_iterator(n1, (0..n1).map(|i| z[i * n3 + k]));
                    let out = self.block3(m).expect("sector block").apply(&col);
                    for i in 0..n1 {
                        z[i * n3 + k] = out[i];
                    }
                }
            }
            _ => {
                let n1 = self.grid.polar[0].len();
                let n2 = self.grid.polar[1].len();
                for (k, &m) in self.modes.iter().enumerate() {
                    // slab over (φ_1, φ_2) for this Fourier row
                    let slab = DMatrix::from_fn(n1, n2, |i, j| z[(i * n2 + j) * n3 + k]);
                    let vecs = &self.inner_block(m).expect("inner block").vectors;
                    let mut coef = slab * vecs;
                    for nn in 0..n2 {
                        let col = coef.column(nn).into_owned();
                        coef.set_column(nn, &self.block4(m, nn).expect("sector block").apply(&col));
                    }
                    let back = coef * vecs.transpose();
                    for i in 0..n1 {
                        for j in 0..n2 {
                            z[(i * n2 + j) * n3 + k] = back[(i, j)];
                        }
                    }
                }
            }
        }
        let mut out = vec![0.0; y.len()];
        let ft = self.fourier.transpose();
        for r in 0..rows {
            let v = DVector::from_column_slice(&z[r * n3..(r + 1) * n3]);
            let t = &ft * v;
            out[r * n3..(r + 1) * n3].copy_from_slice(t.as_slice());
        }
        out
    }

    /// `Ĥψ` on grid samples, in energy units.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = psi.iter().zip(&self.sqrt_w).map(|(a, s)| a * s).collect();
        let e = self.energy_unit();
        self.apply_symmetric(&y).iter().zip(&self.sqrt_w).map(|(a, s)| e * a / s).collect()
    }

    /// Dense symmetric matrix of [`GridOperator::apply_symmetric`].
    pub fn assemble_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply_symmetric(&e);
            e[j] = 0.0;
            for i in 0..n {
                a[(i, j)] = col[i];
            }
        }
        // symmetrize away rounding so the dense eigensolver sees an exact symmetric matrix
        (&a + a.transpose()) * 0.5
    }

    /// Quadrature weights of the grid.
    pub fn weights(&self) -> Vec<f64> {
        self.sqrt_w.iter().map(|s| s * s).collect()
    }
}

fn get_or_try<T>(cell: &OnceLock<T>, init: impl FnOnce() -> Result<T>) -> Result<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = init()?;
    Ok(cell.get_or_init(|| v))
}
