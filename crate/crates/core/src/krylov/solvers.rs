use super::driver::{run_arnoldi, run_gkb, Cycle, Recorder, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::linops::LinearOperator;
use crate::lowrank::truncate;
use crate::report::SolveReport;

pub(crate) fn require_square(solver: &'static str, op: &dyn LinearOperator) -> Result<()> {
    if op.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            solver,
            rows: op.rows(),
            cols: op.cols(),
        })
    }
}

/// GMRES with `x₀ = 0`, optionally hybrid (Tikhonov on the projected
/// problem according to `opts.lambda_rule`).
pub fn gmres(op: &dyn LinearOperator, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    require_square("gmres", op)?;
    let mut rec = Recorder::new("gmres", op, b, opts)?;
    let mv = |x: &[f64]| op.apply(x);
    let mut cycle = Cycle::plain(opts.max_iter);
    cycle.hat_exact = opts.x_exact.map(<[f64]>::to_vec);
    let (x, end) = run_arnoldi(&mut rec, &mv, b, cycle)?;
    rec.push_spectrum(&x)?;
    Ok(rec.finish(x, end.stop_reason()))
}

/// LSQR (Golub-Kahan bidiagonalization plus projected least squares).
pub fn lsqr(op: &dyn LinearOperator, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    let mut rec = Recorder::new("lsqr", op, b, opts)?;
    let mv = |x: &[f64]| op.apply(x);
    let at = |y: &[f64]| op.apply_adjoint(y);
    let mut cycle = Cycle::plain(opts.max_iter);
    cycle.hat_exact = opts.x_exact.map(<[f64]>::to_vec);
    let (x, end) = run_gkb(&mut rec, &mv, &at, b, cycle)?;
    rec.push_spectrum(&x)?;
    Ok(rec.finish(x, end.stop_reason()))
}

/// Truncation ranks of the low-rank flexible solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    /// `κ_B`, applied to every new basis vector.
    pub basis_rank: usize,
    /// `κ`, applied to each reported solution.
    pub solution_rank: usize,
}

impl Truncation {
    pub fn uniform(rank: usize) -> Self {
        Self {
            basis_rank: rank,
            solution_rank: rank,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        for (name, r) in [("basis_rank", self.basis_rank), ("solution_rank", self.solution_rank)] {
            if r == 0 || r > n {
                return Err(invalid(name, format!("must lie in 1..={n}, got {r}")));
            }
        }
        Ok(())
    }
}

/// Flexible GMRES with `P_i = τ_{κ_B}` and reported iterates `τ_κ(Z_k y_k)`.
pub fn lr_fgmres(op: &dyn LinearOperator, b: &[f64], ranks: Truncation, opts: &SolveOptions) -> Result<SolveReport> {
    require_square("lr-fgmres", op)?;
    low_rank_flexible("lr-fgmres", op, b, ranks, opts, false)
}

/// Flexible Golub-Kahan counterpart of [`lr_fgmres`].
pub fn lr_flsqr(op: &dyn LinearOperator, b: &[f64], ranks: Truncation, opts: &SolveOptions) -> Result<SolveReport> {
    low_rank_flexible("lr-flsqr", op, b, ranks, opts, true)
}

fn low_rank_flexible(
    name: &str,
    op: &dyn LinearOperator,
    b: &[f64],
    ranks: Truncation,
    opts: &SolveOptions,
    golub_kahan: bool,
) -> Result<SolveReport> {
    let n = op.image_side();
    ranks.validate(n)?;
    let mut rec = Recorder::new(name, op, b, opts)?;
    let mv = |x: &[f64]| op.apply(x);
    let at = |y: &[f64]| op.apply_adjoint(y);
    let mut precondition = |v: &[f64], _: &[f64]| truncate(v, n, ranks.basis_rank);
    let map = |c: &[f64]| truncate(c, n, ranks.solution_rank);
    let cycle = Cycle {
        precondition: Some(&mut precondition),
        map_solution: Some(&map),
        hat_exact: opts.x_exact.map(<[f64]>::to_vec),
        ..Cycle::plain(opts.max_iter)
    };
    let (x, end) = if golub_kahan {
        run_gkb(&mut rec, &mv, &at, b, cycle)?
    } else {
        run_arnoldi(&mut rec, &mv, b, cycle)?
    };
    rec.push_spectrum(&x)?;
    Ok(rec.finish(x, end.stop_reason()))
}
