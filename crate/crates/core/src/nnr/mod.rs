//! Iteratively reweighted nuclear-norm (Schatten-p) solvers, singular value
//! thresholding, and their configuration.

mod flexible;
mod irn;
pub mod stopping;
mod svt;

pub use flexible::{flexible_nnrp, FlexibleInner, Variant};
pub use irn::{irn_nnrp, IrnInner};
pub use stopping::{
    discrepancy_stop, optimal_lambda_oracle, outer_stop_singular_values, secant_lambda_for, secant_lambda_update,
    Discrepancy, LambdaRule, SecantBounds,
};
pub use svt::{svt, StepSize, SvtState};

use crate::error::{invalid, Result};
use crate::krylov::SolveOptions;
use serde::{Deserialize, Serialize};

/// Smoothing parameter schedule `γ_{k+1} = max(γ_k / decay, γ_min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaSchedule {
    pub gamma0: f64,
    pub decay: f64,
    pub gamma_min: f64,
}

impl Default for GammaSchedule {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            decay: 10.0,
            gamma_min: 1e-10,
        }
    }
}

impl GammaSchedule {
    /// `γ_k`
    pub fn at(&self, k: usize) -> f64 {
        let mut g = self.gamma0;
        for _ in 0..k {
            g = self.next(g);
        }
        g
    }

    pub fn next(&self, gamma: f64) -> f64 {
        (gamma / self.decay).max(self.gamma_min)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0) || !self.gamma0.is_finite() {
            return Err(invalid("gamma0", format!("must be positive, got {}", self.gamma0)));
        }
        if !(self.decay >= 1.0) || !self.decay.is_finite() {
            return Err(invalid("decay", format!("must be at least 1, got {}", self.decay)));
        }
        if !(self.gamma_min > 0.0) || self.gamma_min > self.gamma0 {
            return Err(invalid("gamma_min", format!("must lie in (0, gamma0], got {}", self.gamma_min)));
        }
        Ok(())
    }
}

/// Parameters shared by the nested and flexible NNR solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnrConfig {
    /// Schatten exponent, `0 < p ≤ 1`.
    pub p: f64,
    pub gamma: GammaSchedule,
    pub lambda_rule: LambdaRule,
    pub theta: f64,
    /// Noise norm estimate; enables discrepancy stopping.
    pub epsilon: Option<f64>,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Total iteration budget.
    pub max_iter: usize,
    /// Outer stop on successive normalized spectra; 0 disables it.
    pub tau_sigma: f64,
}

impl Default for NnrConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            gamma: GammaSchedule::default(),
            lambda_rule: LambdaRule::Zero,
            theta: 1.01,
            epsilon: None,
            max_outer: 4,
            max_inner: 50,
            max_iter: 200,
            tau_sigma: 0.1,
        }
    }
}

impl NnrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(invalid("p", format!("must lie in (0, 1], got {}", self.p)));
        }
        self.gamma.validate()?;
        if let Some(d) = self.discrepancy() {
            d.validate()?;
        } else if !(self.theta > 1.0) {
            return Err(invalid("theta", format!("safety factor must exceed 1, got {}", self.theta)));
        }
        for (name, v) in [
            ("max_outer", self.max_outer),
            ("max_inner", self.max_inner),
            ("max_iter", self.max_iter),
        ] {
            if v == 0 {
                return Err(invalid(name, "must be at least 1"));
            }
        }
        if !(self.tau_sigma >= 0.0) || !self.tau_sigma.is_finite() {
            return Err(invalid("tau_sigma", format!("must be finite and nonnegative, got {}", self.tau_sigma)));
        }
        Ok(())
    }

    pub fn discrepancy(&self) -> Option<Discrepancy> {
        self.epsilon.map(|epsilon| Discrepancy {
            epsilon,
            theta: self.theta,
        })
    }

    /// Driver options for a solve monitored by `monitor`.
    pub fn solve_options<'a>(&self, monitor: Monitor<'a>) -> SolveOptions<'a> {
        SolveOptions {
            max_iter: self.max_iter,
            discrepancy: self.discrepancy(),
            lambda_rule: self.lambda_rule,
            x_exact: monitor.x_exact,
            cross_check: monitor.cross_check,
            record_iterates: monitor.record_iterates,
        }
    }
}

/// What to measure while solving, independent of the algorithm.
#[derive(Debug, Clone, Copy, Default)]
pub struct Monitor<'a> {
    pub x_exact: Option<&'a [f64]>,
    pub cross_check: bool,
    pub record_iterates: bool,
}
