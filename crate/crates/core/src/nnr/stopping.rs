//! Stopping rules and the choice of the projected regularization parameter.

use crate::error::{invalid, Result};
use crate::krylov::ProjectedProblem;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Discrepancy principle data: stop once `‖b − A x‖₂ ≤ θ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// Estimate of the noise norm `‖η‖₂`.
    pub epsilon: f64,
    /// Safety factor, `θ > 1`.
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_theta() -> f64 {
    1.01
}

impl Discrepancy {
    pub fn new(epsilon: f64, theta: f64) -> Result<Self> {
        let d = Self { epsilon, theta };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(invalid("epsilon", format!("must be a finite nonnegative noise estimate, got {}", self.epsilon)));
        }
        if !(self.theta > 1.0) || !self.theta.is_finite() {
            return Err(invalid("theta", format!("safety factor must exceed 1, got {}", self.theta)));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.theta * self.epsilon
    }

    pub fn is_satisfied(&self, residual: f64) -> bool {
        discrepancy_stop(residual, self.epsilon, self.theta)
    }

    /// Residual inside the accepted band `[ε, θε]`.
    pub fn in_band(&self, residual: f64) -> bool {
        residual >= self.epsilon && residual <= self.threshold()
    }
}

pub fn discrepancy_stop(projected_residual: f64, epsilon: f64, theta: f64) -> bool {
    projected_residual <= theta * epsilon
}

/// How `λ̂` is chosen for each projected problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum LambdaRule {
    /// Purely iterative regularization, `λ̂ = 0`.
    #[default]
    Zero,
    /// Secant iteration on the discrepancy function of each projected
    /// problem; requires a [`Discrepancy`].
    Secant,
    Fixed { value: f64 },
    /// Minimizes the error against the exact solution; test harness only.
    #[serde(rename = "optimal-oracle")]
    Optimal,
}

/// Limits used by [`secant_lambda_update`].
#[derive(Debug, Clone, Copy)]
pub struct SecantBounds {
    /// First nonzero trial value (`1e-4 ‖H‖²`).
    pub bootstrap: f64,
    pub lambda_max: f64,
}

impl SecantBounds {
    pub fn for_norm(h_norm: f64) -> Self {
        let s = (h_norm * h_norm).max(f64::MIN_POSITIVE);
        Self {
            bootstrap: 1e-4 * s,
            lambda_max: 1e4 * s,
        }
    }
}

/// One secant update for the root of `d(λ̂) = ‖βe₁ − H y(λ̂)‖₂ − θε`.
///
/// `history` holds `(λ̂_j, d_j)` pairs, most recent last.
pub fn secant_lambda_update(history: &[(f64, f64)], epsilon: f64, theta: f64, bounds: SecantBounds) -> f64 {
    let Some(&(lam, d)) = history.last() else {
        return 0.0;
    };
    let residual = d + theta * epsilon;
    if residual >= epsilon && residual <= theta * epsilon {
        return lam;
    }
    if history.len() == 1 {
        return if lam == 0.0 {
            bounds.bootstrap
        } else if d < 0.0 {
            (lam * 10.0).min(bounds.lambda_max)
        } else {
            lam / 10.0
        };
    }
    let (lam_prev, d_prev) = history[history.len() - 2];
    if d == d_prev {
        return lam;
    }
    let next = lam - d * (lam - lam_prev) / (d - d_prev);
    if next.is_finite() {
        next.clamp(0.0, bounds.lambda_max)
    } else {
        lam
    }
}

/// Find `λ̂ ≥ 0` with projected residual in `[ε, θε]`.
///
/// Returns 0 when the unregularized residual is already at or above `ε`
/// (either inside the band, or the discrepancy is not reachable yet).
pub fn secant_lambda_for(problem: &ProjectedProblem, disc: &Discrepancy, warm_start: Option<f64>) -> f64 {
    let target = disc.threshold();
    let d_of = |lam: f64| problem.residual(lam) - target;
    let r0 = problem.residual(0.0);
    if r0 >= disc.epsilon {
        return 0.0;
    }
    let bounds = SecantBounds::for_norm(problem.norm());
    let mut hist = vec![(0.0, r0 - target)];
    if let Some(w) = warm_start.filter(|w| *w > 0.0) {
        hist.push((w, d_of(w)));
    }
    for _ in 0..50 {
        let (lam, d) = *hist.last().expect("nonempty");
        if disc.in_band(d + target) {
            return lam;
        }
        let next = secant_lambda_update(&hist, disc.epsilon, disc.theta, bounds);
        if next == lam {
            break;
        }
        hist.push((next, d_of(next)));
    }
    if let Some(&(lam, d)) = hist.last() {
        if disc.in_band(d + target) {
            return lam;
        }
    }
    // Safeguard: log-scale bisection on a bracket taken from the history.
    let mut lo = hist
        .iter()
        .filter(|(l, d)| *d < 0.0 && *l > 0.0)
        .map(|p| p.0)
        .fold(bounds.bootstrap * 1e-12, f64::max);
    let mut hi = hist
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|p| p.0)
        .fold(f64::INFINITY, f64::min);
    if !hi.is_finite() {
        hi = bounds.lambda_max;
        if d_of(hi) < 0.0 {
            return hi;
        }
    }
    if lo >= hi {
        lo = hi * 1e-12;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let d = d_of(mid);
        if disc.in_band(d + target) {
            return mid;
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Outer stopping rule on normalized spectra: `‖σ_curr − σ_prev‖₂ < τ_σ`,
/// shorter spectra padded with zeros.
pub fn outer_stop_singular_values(sigma_prev: &[f64], sigma_curr: &[f64], tau_sigma: f64) -> bool {
    let len = sigma_prev.len().max(sigma_curr.len());
    let at = |s: &[f64], i: usize| s.get(i).copied().unwrap_or(0.0);
    let dist = (0..len)
        .map(|i| (at(sigma_curr, i) - at(sigma_prev, i)).powi(2))
        .sum::<f64>()
        .sqrt();
    dist < tau_sigma
}

const GRID_LOG_MIN: f64 = -16.0;
const GRID_LOG_MAX: f64 = 2.0;
const GRID_POINTS: usize = 181;

/// `λ̂` minimizing `‖target − y(λ̂)‖₂`, where `target = V_mᵀ x̂_ex` is the
/// exact solution expressed in the projection basis.
///
/// Logarithmic grid on `[1e-16, 1e2]` refined by golden-section search in
/// `log λ̂`. A minimizer at the bottom of the grid is reported as 0.
pub fn optimal_lambda_oracle(problem: &ProjectedProblem, target: &DVector<f64>) -> f64 {
    let err = |log_lam: f64| (target - problem.solve(10f64.powf(log_lam))).norm();
    let step = (GRID_LOG_MAX - GRID_LOG_MIN) / (GRID_POINTS - 1) as f64;
    let errs: Vec<f64> = (0..GRID_POINTS).map(|i| err(GRID_LOG_MIN + step * i as f64)).collect();
    let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
    // differences at rounding level are ties; prefer the smallest λ̂
    let tie = 1e-12 * target.norm();
    let best = errs.iter().position(|&e| e <= min + tie).unwrap_or(0);
    if best == 0 {
        return 0.0;
    }
    let mut a = GRID_LOG_MIN + step * best.saturating_sub(1) as f64;
    let mut b = GRID_LOG_MIN + step * (best + 1).min(GRID_POINTS - 1) as f64;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (err(c), err(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = err(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = err(d);
        }
    }
    10f64.powf(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn discrepancy_threshold_arithmetic() {
        assert!(discrepancy_stop(0.0, 0.1, 1.01));
        assert!(discrepancy_stop(0.1009, 0.1, 1.01));
        assert!(!discrepancy_stop(0.1011, 0.1, 1.01));
        assert!(Discrepancy::new(0.1, 1.0).is_err());
        assert!(Discrepancy::new(-0.1, 1.1).is_err());
    }

    #[test]
    fn secant_keeps_value_inside_band() {
        let bounds = SecantBounds::for_norm(1.0);
        // residual = d + θε = 0.1005 ∈ [0.1, 0.101]
        assert_eq!(secant_lambda_update(&[(0.5, 0.1005 - 0.101)], 0.1, 1.01, bounds), 0.5);
    }

    #[test]
    fn secant_exact_for_affine_discrepancy() {
        let (eps, theta) = (1.0, 1.5);
        let d = |l: f64| 2.0 * l - 3.0; // root at 1.5
        let hist = [(0.2, d(0.2)), (0.7, d(0.7))];
        let next = secant_lambda_update(&hist, eps, theta, SecantBounds::for_norm(10.0));
        assert!((next - 1.5).abs() <= 1e-12);
    }

    #[test]
    fn secant_equal_values_keep_current() {
        let hist = [(0.2, 0.3), (0.7, 0.3)];
        assert_eq!(secant_lambda_update(&hist, 0.1, 1.1, SecantBounds::for_norm(1.0)), 0.7);
    }

    /// `H = [h; c]`: `y(λ) = βh/(h²+c²+λ)`, residual has a closed form.
    #[test]
    fn secant_drives_scalar_discrepancy_to_zero() {
        let (h, c, beta) = (2.0, 0.1, 1.0);
        let residual = |l: f64| {
            let y = beta * h / (h * h + c * c + l);
            ((h * y - beta).powi(2) + (c * y).powi(2)).sqrt()
        };
        // choose ε so that the root is at a known λ
        let lam_star = 0.37;
        let theta = 1.01;
        let eps = residual(lam_star) / theta;
        let bounds = SecantBounds::for_norm(h);
        let mut hist = vec![(0.0, residual(0.0) - theta * eps)];
        for _ in 0..20 {
            let next = secant_lambda_update(&hist, 0.0, theta, bounds);
            hist.push((next, residual(next) - theta * eps));
        }
        let (lam, d) = *hist.last().unwrap();
        assert!(d.abs() < 1e-8, "d = {d}");
        assert!((lam - lam_star).abs() < 1e-6);
    }

    #[test]
    fn secant_search_lands_in_band() {
        let h = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.5, 1.0, 0.0, 0.05]);
        let prob = ProjectedProblem::new(h, 3.0).unwrap();
        let r0 = prob.residual(0.0);
        let disc = Discrepancy::new(5.0 * r0 + 0.01, 1.01).unwrap();
        let lam = secant_lambda_for(&prob, &disc, None);
        assert!(lam > 0.0);
        assert!(disc.in_band(prob.residual(lam)));
    }

    #[test]
    fn outer_stop_boundary() {
        assert!(outer_stop_singular_values(&[1.0, 0.5], &[1.0, 0.5], 1e-9));
        let tau = 0.125;
        assert!(!outer_stop_singular_values(&[1.0, 0.5], &[1.0, 0.5 + tau], tau));
        assert!(outer_stop_singular_values(&[1.0], &[1.0, 0.01], 0.1));
    }

    #[test]
    fn optimal_oracle_exact_subspace_is_zero() {
        let h = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, 0.3, 1.0, 0.0, 0.4]);
        let prob = ProjectedProblem::new(h, 1.0).unwrap();
        let target = prob.solve(0.0);
        assert_eq!(optimal_lambda_oracle(&prob, &target), 0.0);
    }

    #[test]
    fn optimal_oracle_matches_calculus() {
        // y(λ) = βh/(h²+λ); target t ⇒ λ* = βh/t − h²
        let (h, beta, t) = (1.0, 2.0, 1.5);
        let prob = ProjectedProblem::new(DMatrix::from_column_slice(2, 1, &[h, 0.0]), beta).unwrap();
        let lam = optimal_lambda_oracle(&prob, &DVector::from_vec(vec![t]));
        assert!((lam - (beta * h / t - h * h)).abs() <= 1e-6, "{lam}");
    }

    #[test]
    fn lambda_rule_json() {
        let r: LambdaRule = serde_json::from_str(r#"{"rule":"fixed","value":0.5}"#).unwrap();
        assert_eq!(r, LambdaRule::Fixed { value: 0.5 });
        let r: LambdaRule = serde_json::from_str(r#"{"rule":"optimal-oracle"}"#).unwrap();
        assert_eq!(r, LambdaRule::Optimal);
    }
}
