use crate::error::{invalid, Result};
use crate::krylov::driver::Recorder;
use crate::krylov::SolveOptions;
use crate::linalg::{axpy, norm2, sub};
use crate::linops::{unvec, vec, LinearOperator};
use crate::lowrank::shrink;
use crate::nnr::stopping::LambdaRule;
use crate::report::{SolveReport, StopReason};

#[derive(Debug, Clone, PartialEq)]
pub enum StepSize {
    Constant(f64),
    /// `δ_k` for `k = 1, 2, …`; the last value repeats.
    Schedule(Vec<f64>),
}

impl StepSize {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            StepSize::Constant(d) => *d,
            StepSize::Schedule(s) => s[(k - 1).min(s.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |d: f64| d > 0.0 && d.is_finite();
        let valid = match self {
            StepSize::Constant(d) => ok(*d),
            StepSize::Schedule(s) => !s.is_empty() && s.iter().all(|&d| ok(d)),
        };
        if valid {
            Ok(())
        } else {
            Err(invalid("step_size", "step sizes must be positive and finite"))
        }
    }
}

/// Singular value thresholding iteration state, `y₀ = 0`.
pub struct SvtState<'a> {
    op: &'a dyn LinearOperator,
    b: &'a [f64],
    tau: f64,
    y: Vec<f64>,
}

impl<'a> SvtState<'a> {
    pub fn new(op: &'a dyn LinearOperator, b: &'a [f64], tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("tau", format!("threshold must be positive, got {tau}")));
        }
        crate::error::check_len("right-hand side", op.rows(), b.len())?;
        Ok(Self {
            op,
            b,
            tau,
            y: vec![0.0; b.len()],
        })
    }

    /// `X_k = D_τ(unvec(Aᵀ y_{k−1}))`, `y_k = y_{k−1} + δ (b − A x_k)`.
    /// Returns `x_k` and `‖b − A x_k‖₂`.
    pub fn step(&mut self, delta: f64) -> Result<(Vec<f64>, f64)> {
        let n = self.op.image_side();
        let g = unvec(&self.op.apply_adjoint(&self.y), n)?;
        let x = vec(&shrink(&g, self.tau)?);
        let r = sub(self.b, &self.op.apply(&x));
        axpy(delta, &r, &mut self.y);
        Ok((x, norm2(&r)))
    }

    pub fn dual(&self) -> &[f64] {
        &self.y
    }
}

pub fn svt(op: &dyn LinearOperator, b: &[f64], tau: f64, step: &StepSize, opts: &SolveOptions) -> Result<SolveReport> {
    step.validate()?;
    if opts.lambda_rule != LambdaRule::Zero {
        return Err(invalid("lambda_rule", "svt has no projected Tikhonov problem"));
    }
    let mut rec = Recorder::new("svt", op, b, opts)?;
    let mut state = SvtState::new(op, b, tau)?;
    let mut x = vec![0.0; op.cols()];
    let mut reason = StopReason::MaxIterations;
    for k in 1..=opts.max_iter {
        let (xk, res) = state.step(step.at(k))?;
        x = xk;
        rec.record(&x, res, 0.0, 0);
        if rec.discrepancy_met(res) {
            reason = StopReason::Discrepancy;
            break;
        }
    }
    rec.push_spectrum(&x)?;
    Ok(rec.finish(x, reason))
}
