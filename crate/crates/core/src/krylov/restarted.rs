use super::driver::{Recorder, SolveOptions};
use super::solvers::require_square;
use crate::error::{invalid, Result};
use crate::linalg::{combine, dot, norm2, scale, sub};
use crate::linops::LinearOperator;
use crate::lowrank::truncate;
use crate::nnr::stopping::LambdaRule;
use crate::report::{SolveReport, StopReason};
use nalgebra::{DMatrix, DVector};

/// Diagonal shift used when a Gram matrix is numerically singular.
pub const GRAM_RIDGE: f64 = 1e-12;

/// Restart schedule of [`rs_lr_gmres`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restart {
    /// Inner iterations per cycle (`m`).
    pub length: usize,
    /// Truncation rank `κ` for basis vectors and solutions.
    pub rank: usize,
    pub max_outer: usize,
}

/// Solve `G y = r` for a symmetric positive semidefinite Gram matrix, falling
/// back to a relative ridge when Cholesky fails.
fn gram_solve(g: DMatrix<f64>, r: DVector<f64>) -> DVector<f64> {
    if let Some(ch) = g.clone().cholesky() {
        let y = ch.solve(&r);
        if y.iter().all(|v| v.is_finite()) {
            return y;
        }
    }
    log::warn!("singular Gram matrix of order {}, using a ridge", g.nrows());
    let shift = GRAM_RIDGE * g.diagonal().amax().max(f64::MIN_POSITIVE);
    let k = g.nrows();
    let shifted = g + DMatrix::identity(k, k) * shift;
    match shifted.clone().cholesky() {
        Some(ch) => ch.solve(&r),
        None => shifted.pseudo_inverse(f64::EPSILON).map(|p| p * &r).unwrap_or_else(|_| DVector::zeros(k)),
    }
}

fn gram(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let k = cols.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let d = dot(&cols[i], &cols[j]);
            g[(i, j)] = d;
            g[(j, i)] = d;
        }
    }
    g
}

/// Restarted low-rank-projected GMRES.
///
/// Cycle `ℓ` starts from `v₁ = r_{ℓ−1}/‖r_{ℓ−1}‖`; each new basis vector is
/// the truncated oblique-projection residual of `A v_{k−1}` against the
/// (non-orthonormal) previous basis, and the cycle ends with
/// `x_ℓ = τ_κ(x_{ℓ−1} + V_m y_m)`, `(U_mᵀ A V_m) y_m = U_mᵀ r_{ℓ−1}`,
/// `U_m = A V_m`. One iteration is recorded per inner step using the
/// candidate `τ_κ(x_{ℓ−1} + V_k y_k)` and its true residual.
pub fn rs_lr_gmres(op: &dyn LinearOperator, b: &[f64], restart: Restart, opts: &SolveOptions) -> Result<SolveReport> {
    require_square("rs-lr-gmres", op)?;
    let n = op.image_side();
    if restart.length == 0 {
        return Err(invalid("restart_len", "must be at least 1"));
    }
    if restart.max_outer == 0 {
        return Err(invalid("max_outer", "must be at least 1"));
    }
    if restart.rank == 0 || restart.rank > n {
        return Err(invalid("truncation_rank", format!("must lie in 1..={n}, got {}", restart.rank)));
    }
    if opts.lambda_rule != LambdaRule::Zero {
        return Err(invalid("lambda_rule", "rs-lr-gmres has no projected Tikhonov problem"));
    }
    let mut rec = Recorder::new("rs-lr-gmres", op, b, opts)?;
    let len = op.cols();
    let mut x = vec![0.0; len];
    let mut reason = StopReason::MaxIterations;

    'outer: for outer in 0..restart.max_outer {
        let r = sub(b, &op.apply(&x));
        let beta = norm2(&r);
        if beta == 0.0 {
            reason = StopReason::ZeroResidual;
            break;
        }
        let mut v1 = r.clone();
        scale(1.0 / beta, &mut v1);
        let mut basis: Vec<Vec<f64>> = vec![v1];
        // u-columns: A v_j, which double as the next Krylov candidates
        let mut images: Vec<Vec<f64>> = Vec::new();
        let mut cycle_x = x.clone();
        for k in 1..=restart.length {
            if rec.remaining() == 0 {
                if k > 1 {
                    x = cycle_x;
                    rec.push_spectrum(&x)?;
                }
                break 'outer;
            }
            if k > 1 {
                let u = images.last().expect("at least one image").clone();
                let g = gram(&basis);
                let proj = DVector::from_iterator(basis.len(), basis.iter().map(|v| dot(v, &u)));
                let coeffs = gram_solve(g, proj);
                let w = sub(&u, &combine(&basis, coeffs.as_slice(), len));
                let c = truncate(&w, n, restart.rank)?;
                let nc = norm2(&c);
                if nc <= super::BREAKDOWN_TOL * norm2(&u) {
                    reason = StopReason::Breakdown;
                    x = cycle_x;
                    rec.push_spectrum(&x)?;
                    break 'outer;
                }
                let mut vk = c;
                scale(1.0 / nc, &mut vk);
                basis.push(vk);
            }
            images.push(op.apply(basis.last().expect("nonempty")));
            let rhs = DVector::from_iterator(images.len(), images.iter().map(|u| dot(u, &r)));
            let y = gram_solve(gram(&images), rhs);
            let step = combine(&basis, y.as_slice(), len);
            let candidate: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + s).collect();
            cycle_x = truncate(&candidate, n, restart.rank)?;
            let residual = norm2(&sub(b, &op.apply(&cycle_x)));
            rec.record(&cycle_x, residual, 0.0, outer);
            if rec.discrepancy_met(residual) {
                reason = StopReason::Discrepancy;
                x = cycle_x;
                rec.push_spectrum(&x)?;
                break 'outer;
            }
            if residual == 0.0 {
                reason = StopReason::ZeroResidual;
                x = cycle_x;
                rec.push_spectrum(&x)?;
                break 'outer;
            }
        }
        x = cycle_x;
        rec.push_spectrum(&x)?;
    }
    Ok(rec.finish(x, reason))
}
