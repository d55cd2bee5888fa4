//! Per-iteration bookkeeping shared by every projection solver: choosing
//! `λ̂`, forming iterates, metrics and stopping.

use super::{ArnoldiState, GkbState, ProjectedProblem, StepOutcome};
use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{combine, dot, norm2, sub};
use crate::linops::LinearOperator;
use crate::nnr::stopping::{optimal_lambda_oracle, secant_lambda_for, Discrepancy, LambdaRule};
use crate::problems::normalized_spectrum;
use crate::report::{IterationRecord, SolveReport, StopReason};
use nalgebra::DVector;

/// Options common to all iterative solvers.
#[derive(Debug, Clone)]
pub struct SolveOptions<'a> {
    /// Total iteration budget (all cycles together).
    pub max_iter: usize,
    /// Noise-based stopping; also required by [`LambdaRule::Secant`].
    pub discrepancy: Option<Discrepancy>,
    pub lambda_rule: LambdaRule,
    /// Exact solution, for relative errors and the oracle parameter rule.
    pub x_exact: Option<&'a [f64]>,
    /// Recompute `‖b − A x‖₂` at every iteration.
    pub cross_check: bool,
    pub record_iterates: bool,
}

impl<'a> SolveOptions<'a> {
    pub fn new(max_iter: usize) -> Self {
        Self {
            max_iter,
            discrepancy: None,
            lambda_rule: LambdaRule::Zero,
            x_exact: None,
            cross_check: false,
            record_iterates: false,
        }
    }

    pub fn with_exact(mut self, x: &'a [f64]) -> Self {
        self.x_exact = Some(x);
        self
    }

    pub fn with_discrepancy(mut self, d: Discrepancy) -> Self {
        self.discrepancy = Some(d);
        self
    }

    pub fn with_lambda_rule(mut self, rule: LambdaRule) -> Self {
        self.lambda_rule = rule;
        self
    }

    pub fn cross_checked(mut self) -> Self {
        self.cross_check = true;
        self
    }

    pub fn recording_iterates(mut self) -> Self {
        self.record_iterates = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if let Some(d) = &self.discrepancy {
            d.validate()?;
        }
        match self.lambda_rule {
            LambdaRule::Secant if self.discrepancy.is_none() => {
                return Err(invalid("lambda_rule", "the secant rule needs a discrepancy (noise) estimate"))
            }
            LambdaRule::Optimal if self.x_exact.is_none() => {
                return Err(invalid("lambda_rule", "the optimal-oracle rule needs the exact solution"))
            }
            LambdaRule::Fixed { value } if !(value >= 0.0) => {
                return Err(invalid("lambda_rule", format!("fixed value must be nonnegative, got {value}")))
            }
            _ => {}
        }
        Ok(())
    }
}

pub(crate) struct Recorder<'a> {
    op: &'a dyn LinearOperator,
    b: &'a [f64],
    opts: &'a SolveOptions<'a>,
    exact_norm: f64,
    report: SolveReport,
    last_lambda: Option<f64>,
}

impl<'a> Recorder<'a> {
    pub fn new(solver: &str, op: &'a dyn LinearOperator, b: &'a [f64], opts: &'a SolveOptions<'a>) -> Result<Self> {
        opts.validate()?;
        check_len("right-hand side", op.rows(), b.len())?;
        let mut exact_norm = 0.0;
        if let Some(x) = opts.x_exact {
            check_len("exact solution", op.cols(), x.len())?;
            exact_norm = norm2(x);
            if exact_norm == 0.0 {
                return Err(Error::ZeroVector("exact solution"));
            }
        }
        Ok(Self {
            op,
            b,
            opts,
            exact_norm,
            report: SolveReport {
                solver: solver.to_string(),
                side: op.image_side(),
                iterations: Vec::new(),
                best: None,
                best_x: vec![0.0; op.cols()],
                final_x: vec![0.0; op.cols()],
                spectra: Vec::new(),
                stop_reason: StopReason::MaxIterations,
                iterates: Vec::new(),
            },
            last_lambda: None,
        })
    }

    pub fn done(&self) -> usize {
        self.report.iterations.len()
    }

    pub fn remaining(&self) -> usize {
        self.opts.max_iter.saturating_sub(self.done())
    }

    pub fn discrepancy_met(&self, residual: f64) -> bool {
        self.opts.discrepancy.is_some_and(|d| d.is_satisfied(residual))
    }

    /// Pick `λ̂` for the current projected problem and solve it.
    pub fn solve_projected(
        &mut self,
        prob: &ProjectedProblem,
        oracle_target: Option<DVector<f64>>,
    ) -> Result<(f64, DVector<f64>, f64)> {
        let lambda = match self.opts.lambda_rule {
            LambdaRule::Zero => 0.0,
            LambdaRule::Fixed { value } => value,
            LambdaRule::Secant => {
                let disc = self.opts.discrepancy.expect("validated");
                secant_lambda_for(prob, &disc, self.last_lambda)
            }
            LambdaRule::Optimal => {
                let target = oracle_target
                    .ok_or_else(|| invalid("lambda_rule", "the optimal-oracle rule is not available for this solver"))?;
                optimal_lambda_oracle(prob, &target)
            }
        };
        self.last_lambda = Some(lambda);
        let y = prob.solve(lambda);
        let r = prob.residual_of(&y);
        Ok((lambda, y, r))
    }

    pub fn record(&mut self, x: &[f64], residual: f64, lambda_hat: f64, outer: usize) {
        let iter = self.done() + 1;
        let rel_error = self
            .opts
            .x_exact
            .map(|xe| norm2(&sub(xe, x)) / self.exact_norm);
        let true_residual = self
            .opts
            .cross_check
            .then(|| norm2(&sub(self.b, &self.op.apply(x))));
        if let Some(e) = rel_error {
            if self.report.best.is_none_or(|(_, b)| e < b) {
                self.report.best = Some((iter, e));
                self.report.best_x = x.to_vec();
            }
        }
        if self.opts.record_iterates {
            self.report.iterates.push(x.to_vec());
        }
        self.report.iterations.push(IterationRecord {
            iter,
            outer,
            rel_error,
            residual,
            true_residual,
            lambda_hat,
        });
    }

    pub fn push_spectrum(&mut self, x: &[f64]) -> Result<()> {
        let s = normalized_spectrum(x, self.op.image_side())?;
        self.report.spectra.push(s);
        Ok(())
    }

    pub fn last_spectrum(&self) -> Option<&[f64]> {
        self.report.spectra.last().map(Vec::as_slice)
    }

    pub fn finish(mut self, final_x: Vec<f64>, reason: StopReason) -> SolveReport {
        if self.report.best.is_none() {
            self.report.best_x = final_x.clone();
        }
        self.report.final_x = final_x;
        self.report.stop_reason = reason;
        self.report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CycleEnd {
    Discrepancy,
    Breakdown,
    /// The cycle's own step limit was reached.
    Steps,
    /// The global iteration budget ran out.
    Budget,
    ZeroStart,
}

impl CycleEnd {
    pub fn stop_reason(self) -> StopReason {
        match self {
            CycleEnd::Discrepancy => StopReason::Discrepancy,
            CycleEnd::Breakdown => StopReason::Breakdown,
            CycleEnd::Steps | CycleEnd::Budget => StopReason::MaxIterations,
            CycleEnd::ZeroStart => StopReason::ZeroResidual,
        }
    }
}

pub(crate) type MatVec<'c> = &'c dyn Fn(&[f64]) -> Vec<f64>;
/// `(v_i, x_{i-1}) ↦ z_i`
pub(crate) type FlexPrecond<'c> = &'c mut dyn FnMut(&[f64], &[f64]) -> Result<Vec<f64>>;
pub(crate) type MapSolution<'c> = &'c dyn Fn(&[f64]) -> Result<Vec<f64>>;

pub(crate) struct Cycle<'c> {
    pub precondition: Option<FlexPrecond<'c>>,
    /// Maps `Z y` to the reported iterate.
    pub map_solution: Option<MapSolution<'c>>,
    /// Exact solution in the variable the basis `V` approximates (for the
    /// oracle parameter rule).
    pub hat_exact: Option<Vec<f64>>,
    pub max_steps: usize,
    pub outer: usize,
    pub stop_on_discrepancy: bool,
}

impl<'c> Cycle<'c> {
    pub fn plain(max_steps: usize) -> Self {
        Self {
            precondition: None,
            map_solution: None,
            hat_exact: None,
            max_steps,
            outer: 0,
            stop_on_discrepancy: true,
        }
    }
}

fn oracle_target(rec: &Recorder, basis: &[Vec<f64>], k: usize, hat: Option<&Vec<f64>>) -> Option<DVector<f64>> {
    if rec.opts.lambda_rule != LambdaRule::Optimal {
        return None;
    }
    let hat = hat?;
    Some(DVector::from_iterator(k, basis[..k].iter().map(|v| dot(v, hat))))
}

/// Run (flexible) Arnoldi steps on `matvec` from `start`, recording one
/// iterate per step. Returns the last iterate.
pub(crate) fn run_arnoldi(
    rec: &mut Recorder,
    matvec: MatVec,
    start: &[f64],
    mut cycle: Cycle,
) -> Result<(Vec<f64>, CycleEnd)> {
    let n = start.len();
    let mut x = vec![0.0; rec.op.cols()];
    if norm2(start) == 0.0 {
        return Ok((x, CycleEnd::ZeroStart));
    }
    let mut st = ArnoldiState::new(start)?;
    for _ in 0..cycle.max_steps {
        if rec.remaining() == 0 {
            return Ok((x, CycleEnd::Budget));
        }
        let outcome = match cycle.precondition.as_mut() {
            Some(p) => {
                let xp = &x;
                let mut f = |v: &[f64]| p(v, xp);
                st.step(matvec, Some(&mut f))?
            }
            None => st.step(matvec, None)?,
        };
        let k = st.steps();
        let prob = ProjectedProblem::new(st.hessenberg(), st.beta())?;
        let target = oracle_target(rec, st.basis(), k, cycle.hat_exact.as_ref());
        let (lambda, y, residual) = rec.solve_projected(&prob, target)?;
        let zy = combine(st.solution_basis(), y.as_slice(), n);
        x = match cycle.map_solution {
            Some(m) => m(&zy)?,
            None => zy,
        };
        rec.record(&x, residual, lambda, cycle.outer);
        if cycle.stop_on_discrepancy && rec.discrepancy_met(residual) {
            return Ok((x, CycleEnd::Discrepancy));
        }
        if outcome == StepOutcome::Breakdown {
            return Ok((x, CycleEnd::Breakdown));
        }
    }
    Ok((x, CycleEnd::Steps))
}

/// Golub-Kahan counterpart of [`run_arnoldi`] for `A` (possibly
/// rectangular) given by `matvec`/`adjoint`, started from `b`.
pub(crate) fn run_gkb(
    rec: &mut Recorder,
    matvec: MatVec,
    adjoint: MatVec,
    b: &[f64],
    mut cycle: Cycle,
) -> Result<(Vec<f64>, CycleEnd)> {
    let mut x = vec![0.0; rec.op.cols()];
    if norm2(b) == 0.0 {
        return Ok((x, CycleEnd::ZeroStart));
    }
    let mut st = GkbState::new(b, adjoint)?;
    let n = st.right_basis()[0].len();
    for _ in 0..cycle.max_steps {
        if rec.remaining() == 0 {
            return Ok((x, CycleEnd::Budget));
        }
        let outcome = match cycle.precondition.as_mut() {
            Some(p) => {
                let xp = &x;
                let mut f = |v: &[f64]| p(v, xp);
                st.step(matvec, adjoint, Some(&mut f))?
            }
            None => st.step(matvec, adjoint, None)?,
        };
        let k = st.steps();
        let prob = ProjectedProblem::new(st.projected(), st.beta())?;
        let target = oracle_target(rec, st.right_basis(), k, cycle.hat_exact.as_ref());
        let (lambda, y, residual) = rec.solve_projected(&prob, target)?;
        let zy = combine(st.solution_basis(), y.as_slice(), n);
        x = match cycle.map_solution {
            Some(m) => m(&zy)?,
            None => zy,
        };
        rec.record(&x, residual, lambda, cycle.outer);
        if cycle.stop_on_discrepancy && rec.discrepancy_met(residual) {
            return Ok((x, CycleEnd::Discrepancy));
        }
        if outcome == StepOutcome::Breakdown || st.is_broken_down() {
            return Ok((x, CycleEnd::Breakdown));
        }
    }
    Ok((x, CycleEnd::Steps))
}
