use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIterations,
    Discrepancy,
    Breakdown,
    /// Successive normalized spectra agreed to within `τ_σ`.
    SpectrumStagnation,
    ZeroResidual,
}

/// Metrics of one (total) iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based running iteration count across all cycles.
    pub iter: usize,
    /// 0-based outer cycle (always 0 for single-loop solvers).
    pub outer: usize,
    pub rel_error: Option<f64>,
    /// Residual norm as monitored by the solver (projected where available).
    pub residual: f64,
    /// `‖b − A x‖₂` recomputed from the iterate, when cross-checking.
    pub true_residual: Option<f64>,
    pub lambda_hat: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub side: usize,
    pub iterations: Vec<IterationRecord>,
    /// `(iteration, relative error)` of the most accurate iterate, when the
    /// exact solution is known.
    pub best: Option<(usize, f64)>,
    /// The most accurate iterate (the final one if the truth is unknown).
    pub best_x: Vec<f64>,
    pub final_x: Vec<f64>,
    /// Normalized singular values at the end of each outer cycle (a single
    /// entry for the final iterate of single-loop solvers).
    pub spectra: Vec<Vec<f64>>,
    pub stop_reason: StopReason,
    /// Every iterate, only populated on request.
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn min_rel_error(&self) -> Option<f64> {
        self.best.map(|b| b.1)
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.residual)
    }

    /// Largest `|projected − true|` residual mismatch over all cross-checked
    /// iterations.
    pub fn max_residual_mismatch(&self) -> Option<f64> {
        self.iterations
            .iter()
            .filter_map(|r| r.true_residual.map(|t| (t - r.residual).abs()))
            .reduce(f64::max)
    }
}
