use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, scale};
use nalgebra::DMatrix;

/// `h_{k+1,k} ≤ BREAKDOWN_TOL · ‖H‖_F` declares a (lucky) breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// Partial (flexible) Arnoldi factorization `Op Z_k = V_{k+1} H_k`.
///
/// Without a preconditioner `Z_k = V_k` and this is the standard Arnoldi
/// process. Orthogonalization is modified Gram-Schmidt followed by one full
/// re-orthogonalization pass.
#[derive(Debug, Clone)]
pub struct ArnoldiState {
    v: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    /// Column `j` holds `h_{1..=j+2, j+1}`.
    h: Vec<Vec<f64>>,
    beta: f64,
    h_norm_sq: f64,
    breakdown: bool,
}

/// Result of one expansion step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Expanded,
    Breakdown,
}

/// Two passes of modified Gram-Schmidt of `w` against `basis`; returns the
/// accumulated coefficients.
pub(crate) fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, q) in coeffs.iter_mut().zip(basis) {
            let proj = dot(w, q);
            *c += proj;
            axpy(-proj, q, w);
        }
    }
    coeffs
}

impl ArnoldiState {
    /// Start from `v₁ = start / ‖start‖₂`.
    pub fn new(start: &[f64]) -> Result<Self> {
        let beta = norm2(start);
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::ZeroVector("Arnoldi starting vector"));
        }
        let mut v1 = start.to_vec();
        scale(1.0 / beta, &mut v1);
        Ok(Self {
            v: vec![v1],
            z: Vec::new(),
            h: Vec::new(),
            beta,
            h_norm_sq: 0.0,
            breakdown: false,
        })
    }

    /// One expansion step. `matvec` applies the (square) operator;
    /// `precondition` maps `v_k` to `z_k` (pass `None` for standard Arnoldi).
    pub fn step(
        &mut self,
        matvec: &dyn Fn(&[f64]) -> Vec<f64>,
        precondition: Option<&mut dyn FnMut(&[f64]) -> Result<Vec<f64>>>,
    ) -> Result<StepOutcome> {
        if self.breakdown {
            return Ok(StepOutcome::Breakdown);
        }
        let n = self.v[0].len();
        let vk = self.v.last().expect("basis is never empty");
        let zk = match precondition {
            Some(p) => {
                let z = p(vk)?;
                crate::error::check_len("preconditioner output", n, z.len())?;
                z
            }
            None => vk.clone(),
        };
        let mut w = matvec(&zk);
        if w.len() != n {
            return Err(Error::NotSquare {
                solver: "arnoldi",
                rows: w.len(),
                cols: n,
            });
        }
        let mut col = orthogonalize(&mut w, &self.v);
        let next = norm2(&w);
        col.push(next);
        self.h_norm_sq += col.iter().map(|c| c * c).sum::<f64>();
        self.z.push(zk);
        self.h.push(col);
        if next <= BREAKDOWN_TOL * self.h_norm_sq.sqrt() {
            self.breakdown = true;
            return Ok(StepOutcome::Breakdown);
        }
        scale(1.0 / next, &mut w);
        self.v.push(w);
        Ok(StepOutcome::Expanded)
    }

    pub fn steps(&self) -> usize {
        self.h.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_broken_down(&self) -> bool {
        self.breakdown
    }

    /// Orthonormal basis `V` (k+1 columns, or k after a breakdown).
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// Solution-space basis `Z_k`.
    pub fn solution_basis(&self) -> &[Vec<f64>] {
        &self.z
    }

    /// The `(k+1)×k` upper Hessenberg matrix `H_k`.
    pub fn hessenberg(&self) -> DMatrix<f64> {
        let k = self.h.len();
        let mut out = DMatrix::zeros(k + 1, k);
        for (j, col) in self.h.iter().enumerate() {
            for (i, &val) in col.iter().enumerate() {
                out[(i, j)] = val;
            }
        }
        out
    }
}
