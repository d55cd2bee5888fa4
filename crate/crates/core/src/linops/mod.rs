//! Matrix-free forward operators and the vector/image plumbing.
//!
//! Images `X ∈ R^{n×n}` are identified with vectors `x = vec(X) ∈ R^{n²}`
//! by stacking columns, which is exactly the storage order of
//! [`nalgebra::DMatrix`], so [`vec`] and [`unvec`] are plain copies.

mod blur;
mod dense;
mod inpainting;
mod tomography;

pub use blur::{gaussian_blur_operator, shaking_psf, PsfBlurOperator, SeparableBlurOperator};
pub use dense::{parse_dense_matrix, write_dense_matrix, DenseOperator};
pub use inpainting::{inpainting_operator, InpaintingOperator};
pub use tomography::{tomography_operator, TomographyOperator};

use crate::error::{check_len, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Blur,
    Tomography,
    Inpainting,
    ExplicitDense,
    Composite,
}

/// A real linear map `R^cols → R^rows` known only through its action and
/// the action of its transpose.
///
/// Implementations are immutable after construction; `apply_into` and
/// `apply_adjoint_into` must be pure and deterministic.
pub trait LinearOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Side `n` of the square image the domain vectors represent (`n² = cols`).
    fn image_side(&self) -> usize;
    fn kind(&self) -> OperatorKind;

    /// `y = A x`; `x.len() == cols`, `y.len() == rows`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
    /// `x = Aᵀ y`; `y.len() == rows`, `x.len() == cols`.
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "apply: input length");
        let mut y = vec![0.0; self.rows()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows(), "apply_adjoint: input length");
        let mut x = vec![0.0; self.cols()];
        self.apply_adjoint_into(y, &mut x);
        x
    }

    fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn image_side(&self) -> usize {
        (**self).image_side()
    }
    fn kind(&self) -> OperatorKind {
        (**self).kind()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        (**self).apply_adjoint_into(y, x)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn image_side(&self) -> usize {
        (**self).image_side()
    }
    fn kind(&self) -> OperatorKind {
        (**self).kind()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        (**self).apply_adjoint_into(y, x)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for std::sync::Arc<T> {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn image_side(&self) -> usize {
        (**self).image_side()
    }
    fn kind(&self) -> OperatorKind {
        (**self).kind()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        (**self).apply_adjoint_into(y, x)
    }
}

/// The normal-equations operator `AᵀA`, used to run square-only solvers on
/// rectangular problems.
pub struct NormalOperator<A> {
    inner: A,
}

impl<A: LinearOperator> NormalOperator<A> {
    pub fn new(inner: A) -> Self {
        Self { inner }
    }
}

impl<A: LinearOperator> LinearOperator for NormalOperator<A> {
    fn rows(&self) -> usize {
        self.inner.cols()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn image_side(&self) -> usize {
        self.inner.image_side()
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Composite
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let t = self.inner.apply(x);
        self.inner.apply_adjoint_into(&t, y);
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        self.apply_into(y, x)
    }
}

/// Column-stacking `vec(X)`.
pub fn vec(x: &DMatrix<f64>) -> Vec<f64> {
    x.as_slice().to_vec()
}

/// Inverse of [`vec`] for a square `n×n` image.
pub fn unvec(x: &[f64], n: usize) -> Result<DMatrix<f64>> {
    check_len("unvec", n * n, x.len())?;
    Ok(DMatrix::from_column_slice(n, n, x))
}

/// Assemble the explicit matrix of `op` column by column from `A e_j`.
pub fn assemble(op: &dyn LinearOperator) -> DMatrix<f64> {
    let (m, n) = (op.rows(), op.cols());
    let mut out = DMatrix::zeros(m, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_into(&e, &mut col);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    out
}

/// Assemble the explicit matrix of `Aᵀ` from `Aᵀ e_i`.
pub fn assemble_adjoint(op: &dyn LinearOperator) -> DMatrix<f64> {
    let (m, n) = (op.rows(), op.cols());
    let mut out = DMatrix::zeros(n, m);
    let mut e = vec![0.0; m];
    let mut col = vec![0.0; n];
    for i in 0..m {
        e[i] = 1.0;
        op.apply_adjoint_into(&e, &mut col);
        out.column_mut(i).copy_from_slice(&col);
        e[i] = 0.0;
    }
    out
}

pub(crate) fn side_of(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len).then_some(n)
}
