use super::{Monitor, NnrConfig};
use crate::error::{invalid, Result};
use crate::krylov::driver::{run_arnoldi, run_gkb, Cycle, Recorder};
use crate::linops::{unvec, LinearOperator};
use crate::lowrank::{PowerMode, Reweighter};
use crate::nnr::stopping::LambdaRule;
use crate::report::SolveReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlexibleInner {
    /// Flexible Golub-Kahan, `z_i = Sᵀ W⁻² S v_i` (FLSQR-NNRp).
    Fgk,
    /// Flexible Arnoldi, `z_i = Sᵀ W⁻¹ S v_i` (FGMRES-NNRp).
    Farnoldi,
}

/// Where the reweighting SVD comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// SVD of the previous iterate `X_{i−1}`, weights `(σ²+γ)^{p/4−1/2}`.
    Iterate,
    /// SVD of the current basis vector `unvec(v_i)`, weights `σ^{p/4−1/2}`.
    BasisV,
}

/// Single-loop flexible NNR solver.
///
/// With [`Variant::Iterate`] the first step uses `W = S = I` (so it
/// coincides with the first GMRES/LSQR step) and later steps rebuild the
/// preconditioner from `X_{i−1}`, advancing `γ` each time. With
/// [`Variant::BasisV`] every step, the first included, reweights the
/// singular values of `unvec(v_i)` itself.
pub fn flexible_nnrp(
    op: &dyn LinearOperator,
    b: &[f64],
    config: &NnrConfig,
    inner: FlexibleInner,
    variant: Variant,
    monitor: Monitor,
) -> Result<SolveReport> {
    let (name, mode) = match (inner, variant) {
        (FlexibleInner::Fgk, Variant::Iterate) => ("flsqr-nnrp", PowerMode::Gkb),
        (FlexibleInner::Fgk, Variant::BasisV) => ("flsqr-nnrp-v", PowerMode::Gkb),
        (FlexibleInner::Farnoldi, Variant::Iterate) => ("fgmres-nnrp", PowerMode::Arnoldi),
        (FlexibleInner::Farnoldi, Variant::BasisV) => ("fgmres-nnrp-v", PowerMode::Arnoldi),
    };
    if inner == FlexibleInner::Farnoldi {
        crate::krylov::require_square(name, op)?;
    }
    config.validate()?;
    if config.lambda_rule == LambdaRule::Optimal {
        return Err(invalid(
            "lambda_rule",
            "the optimal-oracle rule has no fixed transformed exact solution in flexible solvers",
        ));
    }
    let opts = config.solve_options(monitor);
    let mut rec = Recorder::new(name, op, b, &opts)?;
    let n = op.image_side();
    let (p, schedule) = (config.p, config.gamma);
    let mut step = 0usize;
    let mut gamma = schedule.gamma0;
    let mut precondition = |v: &[f64], x_prev: &[f64]| -> Result<Vec<f64>> {
        step += 1;
        if step == 1 && variant == Variant::Iterate {
            return Ok(v.to_vec());
        }
        let rw = match variant {
            Variant::Iterate => Reweighter::from_iterate(&unvec(x_prev, n)?, p, gamma, mode)?,
            Variant::BasisV => Reweighter::from_basis(v, n, p, gamma, mode)?,
        };
        gamma = schedule.next(gamma);
        rw.precondition(v)
    };
    let cycle = Cycle {
        precondition: Some(&mut precondition),
        ..Cycle::plain(config.max_iter)
    };
    let mv = |x: &[f64]| op.apply(x);
    let (x, end) = match inner {
        FlexibleInner::Fgk => {
            let at = |y: &[f64]| op.apply_adjoint(y);
            run_gkb(&mut rec, &mv, &at, b, cycle)?
        }
        FlexibleInner::Farnoldi => run_arnoldi(&mut rec, &mv, b, cycle)?,
    };
    rec.push_spectrum(&x)?;
    Ok(rec.finish(x, end.stop_reason()))
}
