//! Symmetric eigensolvers: dense (nalgebra) and a Lanczos iteration with
//! full reorthogonalization and locking.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RotorError};

/// Eigenpairs sorted by eigenvalue with their residual norms.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
    pub residuals: Vec<f64>,
}

/// All eigenpairs of a symmetric matrix, ascending.
pub fn dense_symmetric(a: &DMatrix<f64>) -> EigenPairs {
    let e = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let mut out = EigenPairs { values: Vec::new(), vectors: Vec::new(), residuals: Vec::new() };
    for i in idx {
        let v = e.eigenvectors.column(i).into_owned();
        let lam = e.eigenvalues[i];
        out.residuals.push((a * &v - &v * lam).norm());
        out.values.push(lam);
        out.vectors.push(v);
    }
    out
}

/// Lanczos settings. The start vector of every run is drawn from a
/// ChaCha generator seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanczosOptions {
    pub seed: u64,
    /// Krylov steps per locked eigenpair before giving up.
    pub max_iter: usize,
    /// Residual tolerance relative to the operator scale.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { seed: 1, max_iter: 300, tol: 1e-11 }
    }
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, 1.0);
        }
    }
}

/// The `k` smallest eigenpairs of the symmetric map `apply` on `R^n`.
///
/// Each pass runs Lanczos with full reorthogonalization in the orthogonal
/// complement of the pairs already locked and locks the smallest converged
/// Ritz pair, so repeated eigenvalues are found with their multiplicity.
pub fn lanczos_smallest(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    n: usize,
    k: usize,
    opts: &LanczosOptions,
) -> Result<EigenPairs> {
    if k > n {
        return Err(RotorError::Config(format!("requested {k} eigenvalues of a {n}-dimensional operator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let op = |v: &DVector<f64>| DVector::from_vec(apply(v.as_slice()));
    let mut locked: Vec<DVector<f64>> = Vec::new();
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut scale = 0.0f64;
    while locked.len() < k {
        let mut v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        orthogonalize(&mut v, &locked);
        let nv = v.norm();
        if nv == 0.0 {
            return Err(RotorError::NonConvergence { iterations: 0, residuals });
        }
        v /= nv;
        let mut basis: Vec<DVector<f64>> = vec![v];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let free = n - locked.len();
        let steps = opts.max_iter.min(free);
        let mut found = None;
        let mut last_res = f64::INFINITY;
        for j in 0..steps {
            let mut w = op(&basis[j]);
            let a = basis[j].dot(&w);
            alpha.push(a);
            orthogonalize(&mut w, &locked);
            orthogonalize(&mut w, &basis);
            let b = w.norm();
            scale = scale.max(a.abs()).max(b);
            // Ritz values of the current tridiagonal
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let e = SymmetricEigen::new(t);
            let (imin, &theta) =
                e.eigenvalues.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).expect("non-empty tridiagonal");
            let s = e.eigenvectors.column(imin);
            let res = (b * s[m - 1]).abs();
            last_res = res;
            let exhausted = b <= 1e-14 * scale.max(1.0) || j + 1 == free;
            if res <= opts.tol * scale.max(1.0) || exhausted {
                let mut y = DVector::zeros(n);
                for (i, q) in basis.iter().enumerate() {
                    y.axpy(s[i], q, 1.0);
                }
                orthogonalize(&mut y, &locked);
                y /= y.norm();
                found = Some((theta, y));
                break;
            }
            beta.push(b);
            basis.push(w / b);
        }
        match found {
            Some((theta, y)) => {
                let r = (op(&y) - &y * theta).norm();
                values.push(theta);
                residuals.push(r);
                locked.push(y);
            }
            None => {
                residuals.push(last_res);
                return Err(RotorError::NonConvergence { iterations: opts.max_iter, residuals });
            }
        }
    }
    // locking order is not strictly ascending when Ritz values cross
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok(EigenPairs {
        values: idx.iter().map(|&i| values[i]).collect(),
        vectors: idx.iter().map(|&i| locked[i].clone()).collect(),
        residuals: idx.iter().map(|&i| residuals[i]).collect(),
    })
}
