//! Small dense vector kernels shared by the factorizations, and the dense
//! SVD everything else builds on.

use crate::error::{invalid, Error, Result};
use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `sum_j coeffs[j] * columns[j]`, the product of a column-stored basis with
/// a coefficient vector.
pub fn combine(columns: &[Vec<f64>], coeffs: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (col, &c) in columns.iter().zip(coeffs) {
        if c != 0.0 {
            axpy(c, col, &mut out);
        }
    }
    out
}

fn to_faer(a: &DMatrix<f64>) -> Result<faer::Mat<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svd input"));
    }
    Ok(faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]))
}

/// Thin SVD `A = U diag(σ) Vᵀ` with `min(m, n)` singular triplets, `σ`
/// nonincreasing.
///
/// nalgebra's bidiagonal SVD returns wrong singular vectors for some exactly
/// rank-deficient inputs (which truncated iterates are), so this goes
/// through faer.
pub fn thin_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let f = to_faer(a)?;
    let svd = f.thin_svd().map_err(|e| invalid("svd", format!("{e:?}")))?;
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let k = a.nrows().min(a.ncols());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
    let um = DMatrix::from_fn(a.nrows(), k, |i, j| u[(i, order[j])]);
    let vm = DMatrix::from_fn(a.ncols(), k, |i, j| v[(i, order[j])]);
    let sigma = order.iter().map(|&j| s[j].max(0.0)).collect();
    Ok((um, sigma, vm))
}

/// Singular values of `A`, nonincreasing.
pub fn singular_values_of(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut s = to_faer(a)?
        .singular_values()
        .map_err(|e| invalid("svd", format!("{e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    s.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(s)
}

/// Frobenius norm of `QᵀQ − I` for a set of columns.
pub fn orthogonality_loss(columns: &[Vec<f64>]) -> f64 {
    let k = columns.len();
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            let g = dot(&columns[i], &columns[j]) - if i == j { 1.0 } else { 0.0 };
            acc += g * g;
        }
    }
    acc.sqrt()
}
