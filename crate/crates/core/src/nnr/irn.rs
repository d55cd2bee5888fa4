use super::{Monitor, NnrConfig};
use crate::error::Result;
use crate::krylov::driver::{run_arnoldi, run_gkb, Cycle, CycleEnd, Recorder};
use crate::linops::{unvec, LinearOperator};
use crate::lowrank::{PowerMode, Reweighter};
use crate::nnr::stopping::outer_stop_singular_values;
use crate::report::{SolveReport, StopReason};

/// Inner Krylov method of the nested IRN solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrnInner {
    /// Golub-Kahan on `A Sᵀ W⁻¹` (IRN-LSQR-NNRp).
    Gkb,
    /// Arnoldi on `S A Sᵀ W⁻¹` with right-hand side `S b` (IRN-GMRES-NNRp).
    Arnoldi,
}

/// Nested iteratively reweighted nuclear-norm solver.
///
/// Outer cycle `k` freezes `(W_k, S_k)` built from `X_k` (identity for
/// `k = 0`) and runs the inner method from `x = 0` on the transformed
/// problem until the discrepancy principle or `max_inner` ends it; the
/// iterate is mapped back with `x = Sᵀ W⁻¹ x̂`. `γ` follows the schedule
/// once per outer cycle.
pub fn irn_nnrp(
    op: &dyn LinearOperator,
    b: &[f64],
    config: &NnrConfig,
    inner: IrnInner,
    monitor: Monitor,
) -> Result<SolveReport> {
    let name = match inner {
        IrnInner::Gkb => "irn-lsqr-nnrp",
        IrnInner::Arnoldi => "irn-gmres-nnrp",
    };
    if inner == IrnInner::Arnoldi {
        crate::krylov::require_square(name, op)?;
    }
    config.validate()?;
    let opts = config.solve_options(monitor);
    let mut rec = Recorder::new(name, op, b, &opts)?;
    let n = op.image_side();
    let mut x = vec![0.0; op.cols()];
    let mut prev_spectrum: Option<Vec<f64>> = None;
    let mut reason = StopReason::MaxIterations;

    for outer in 0..config.max_outer {
        if rec.remaining() == 0 {
            break;
        }
        let rw = if outer == 0 {
            Reweighter::identity(n, config.p, config.gamma.gamma0, PowerMode::Gkb)
        } else {
            Reweighter::from_iterate(&unvec(&x, n)?, config.p, config.gamma.at(outer), PowerMode::Gkb)?
        };
        let back = |xh: &[f64]| rw.from_singular_domain(xh, -1).expect("length fixed by the operator");
        let map = |xh: &[f64]| rw.from_singular_domain(xh, -1);
        let hat_exact = match monitor.x_exact {
            Some(xe) => Some(rw.to_singular_domain(xe, 1)?),
            None => None,
        };
        let cycle = Cycle {
            map_solution: Some(&map),
            hat_exact,
            outer,
            ..Cycle::plain(config.max_inner)
        };
        let (xk, end) = match inner {
            IrnInner::Gkb => {
                let mv = |xh: &[f64]| op.apply(&back(xh));
                let at = |y: &[f64]| rw.to_singular_domain(&op.apply_adjoint(y), -1).expect("length fixed");
                run_gkb(&mut rec, &mv, &at, b, cycle)?
            }
            IrnInner::Arnoldi => {
                let mv = |xh: &[f64]| rw.to_singular_domain(&op.apply(&back(xh)), 0).expect("length fixed");
                let sb = rw.to_singular_domain(b, 0)?;
                run_arnoldi(&mut rec, &mv, &sb, cycle)?
            }
        };
        if end == CycleEnd::ZeroStart {
            reason = StopReason::ZeroResidual;
            break;
        }
        x = xk;
        reason = end.stop_reason();
        rec.push_spectrum(&x)?;
        let spectrum = rec.last_spectrum().expect("just pushed").to_vec();
        if end == CycleEnd::Budget {
            break;
        }
        if config.tau_sigma > 0.0 {
            if let Some(prev) = &prev_spectrum {
                if outer_stop_singular_values(prev, &spectrum, config.tau_sigma) {
                    reason = StopReason::SpectrumStagnation;
                    break;
                }
            }
        }
        prev_spectrum = Some(spectrum);
    }
    Ok(rec.finish(x, reason))
}
