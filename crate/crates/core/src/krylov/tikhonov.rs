use crate::error::{invalid, Result};
use nalgebra::{DMatrix, DVector};

/// Projected Tikhonov problem `min_y ‖H y − β e₁‖² + λ ‖y‖²` for a small
/// `(k+1)×k` projected matrix.
///
/// The SVD of `H` is computed once, after which every `λ` costs `O(k²)`:
/// the regularization parameter search evaluates many values per step.
#[derive(Debug, Clone)]
pub struct ProjectedProblem {
    h: DMatrix<f64>,
    beta: f64,
    /// Right singular vectors (k×r).
    q: DMatrix<f64>,
    sigma: Vec<f64>,
    /// `β Pᵀ e₁`
    coeffs: Vec<f64>,
}

impl ProjectedProblem {
    pub fn new(h: DMatrix<f64>, beta: f64) -> Result<Self> {
        if h.ncols() == 0 || h.nrows() < h.ncols() {
            return Err(invalid("projected matrix", format!("unexpected shape {}x{}", h.nrows(), h.ncols())));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::NonFinite("projected matrix"));
        }
        let (p, sigma, q) = crate::linalg::thin_svd(&h)?;
        let coeffs = p.row(0).iter().map(|&e| beta * e).collect();
        Ok(Self {
            h,
            beta,
            q,
            sigma,
            coeffs,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Largest singular value of `H`.
    pub fn norm(&self) -> f64 {
        self.sigma.iter().copied().fold(0.0, f64::max)
    }

    /// Tikhonov solution; for `λ = 0` the minimum-norm least-squares
    /// solution (singular values below `k·ε·σ₁` are dropped).
    pub fn solve(&self, lambda: f64) -> DVector<f64> {
        let cutoff = self.norm() * self.h.nrows() as f64 * f64::EPSILON;
        let mut y = DVector::zeros(self.h.ncols());
        for (j, (&s, &c)) in self.sigma.iter().zip(&self.coeffs).enumerate() {
            let f = if lambda > 0.0 {
                s / (s * s + lambda)
            } else if s > cutoff {
                1.0 / s
            } else {
                0.0
            };
            if f != 0.0 {
                y.axpy(f * c, &self.q.column(j), 1.0);
            }
        }
        y
    }

    /// `‖H y − β e₁‖₂`
    pub fn residual_of(&self, y: &DVector<f64>) -> f64 {
        let mut r = &self.h * y;
        r[0] -= self.beta;
        r.norm()
    }

    pub fn residual(&self, lambda: f64) -> f64 {
        self.residual_of(&self.solve(lambda))
    }
}

/// Solve `min_y ‖H y − β e₁‖² + λ̂ ‖y‖²`, returning `y` and the projected
/// residual norm `‖H y − β e₁‖₂`.
pub fn projected_tikhonov(h: &DMatrix<f64>, beta: f64, lambda_hat: f64) -> Result<(DVector<f64>, f64)> {
    if !(lambda_hat >= 0.0) {
        return Err(invalid("lambda_hat", format!("must be nonnegative, got {lambda_hat}")));
    }
    let prob = ProjectedProblem::new(h.clone(), beta)?;
    let y = prob.solve(lambda_hat);
    let r = prob.residual_of(&y);
    Ok((y, r))
}
