//! SVD-based primitives on vectorized square images.
//!
//! The reweighting machinery never forms an `N×N` matrix. With
//! `X_k = U Σ Vᵀ`, the transform `S = Vᵀ ⊗ Uᵀ` acts as `vec(Y) ↦ vec(Uᵀ Y V)`
//! and the weight `W = I ⊗ D` scales row `i` of the transformed image by
//! `d_i`, so every application costs two `n×n` products.

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{singular_values_of, thin_svd};
use crate::linops::{unvec, vec};
use nalgebra::DMatrix;

/// Full SVD `X = U diag(σ) Vᵀ` of a square matrix, singular values sorted
/// nonincreasing.
///
/// Signs are fixed so that the largest-magnitude entry of each column of
/// `U` is positive; `V` is flipped along with it.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdTriple {
    pub fn side(&self) -> usize {
        self.sigma.len()
    }

    /// `U(:,1:k) diag(σ(1:k)) V(:,1:k)ᵀ`
    pub fn reconstruct(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.sigma.len());
        let mut us = self.u.columns(0, k).into_owned();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= self.sigma[j];
        }
        us * self.v.columns(0, k).transpose()
    }

    /// `U diag(f(σ)) Vᵀ`
    pub fn map_singular_values(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= f(self.sigma[j]);
        }
        us * self.v.transpose()
    }
}

pub fn svd(x: &DMatrix<f64>) -> Result<SvdTriple> {
    if !x.is_square() {
        return Err(invalid("svd", format!("expected a square matrix, got {}x{}", x.nrows(), x.ncols())));
    }
    let (u_raw, sigma, v_raw) = thin_svd(x)?;
    let mut u = u_raw;
    let mut v = v_raw;
    for j in 0..sigma.len() {
        let pivot = u.column(j).iter().fold(0.0f64, |best, &e| if e.abs() > best.abs() { e } else { best });
        if pivot < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
    Ok(SvdTriple { u, sigma, v })
}

/// Singular values of `unvec(x)`, nonincreasing.
pub fn singular_values(x: &[f64], n: usize) -> Result<Vec<f64>> {
    singular_values_of(&unvec(x, n)?)
}

/// Rank truncation `τ_κ(c) = vec(U_κ Σ_κ V_κᵀ)` of `C = unvec(c)`.
///
/// `κ = n` returns `c` unchanged rather than a rounded reconstruction.
pub fn truncate(c: &[f64], n: usize, kappa: usize) -> Result<Vec<f64>> {
    if kappa == 0 || kappa > n {
        return Err(invalid("kappa", format!("truncation rank {kappa} outside 1..={n}")));
    }
    if kappa == n {
        check_len("truncation input", n * n, c.len())?;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("truncation input"));
        }
        return Ok(c.to_vec());
    }
    let triple = svd(&unvec(c, n)?)?;
    Ok(vec(&triple.reconstruct(kappa)))
}

/// Singular value shrinkage `D_τ(X) = U max(Σ − τI, 0) Vᵀ`.
pub fn shrink(x: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("shrinkage threshold must be nonnegative, got {tau}")));
    }
    let triple = svd(x)?;
    Ok(triple.map_singular_values(|s| (s - tau).max(0.0)))
}

fn check_schatten(p: f64, gamma: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid("p", format!("must lie in (0, 1], got {p}")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(())
}

/// Smoothed Schatten-p function `Σ_i (σ_i² + γ)^{p/2}`.
pub fn smooth_schatten(x: &DMatrix<f64>, p: f64, gamma: f64) -> Result<f64> {
    check_schatten(p, gamma)?;
    let triple = svd(x)?;
    Ok(triple.sigma.iter().map(|s| (s * s + gamma).powf(p / 2.0)).sum())
}

/// Gradient `p (X Xᵀ + γI)^{p/2−1} X = U diag(p σ (σ² + γ)^{p/2−1}) Vᵀ`.
pub fn smooth_schatten_gradient(x: &DMatrix<f64>, p: f64, gamma: f64) -> Result<DMatrix<f64>> {
    check_schatten(p, gamma)?;
    let triple = svd(x)?;
    Ok(triple.map_singular_values(|s| p * s * (s * s + gamma).powf(p / 2.0 - 1.0)))
}

/// Net weight exponent carried by the flexible preconditioner
/// `Sᵀ W^q S`: `q = −2` for Golub-Kahan based solvers, `q = −1` for Arnoldi.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    Gkb,
    Arnoldi,
}

impl PowerMode {
    pub fn net_power(self) -> i32 {
        match self {
            PowerMode::Gkb => -2,
            PowerMode::Arnoldi => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `W^q S v`: into the singular value domain, then weight.
    S,
    /// `Sᵀ W^q v`: weight, then back to the image domain.
    STranspose,
}

/// The reweighting pair `(W, S)` built from an SVD, stored implicitly.
#[derive(Debug, Clone)]
pub struct Reweighter {
    n: usize,
    /// `None` for the initial `W = S = I`.
    svd: Option<SvdTriple>,
    /// Diagonal of `D⁻¹`, one entry per row of the transformed image.
    inverse_weights: Vec<f64>,
    p: f64,
    gamma: f64,
    mode: PowerMode,
}

impl Reweighter {
    /// `W = I`, `S = I`.
    pub fn identity(n: usize, p: f64, gamma: f64, mode: PowerMode) -> Self {
        Self {
            n,
            svd: None,
            inverse_weights: vec![1.0; n],
            p,
            gamma,
            mode,
        }
    }

    /// Reweighter from the current iterate: `S = Vᵀ ⊗ Uᵀ`, diagonal weights
    /// `(σ_i² + γ)^{p/4 − 1/2}`.
    pub fn from_iterate(xk: &DMatrix<f64>, p: f64, gamma: f64, mode: PowerMode) -> Result<Self> {
        check_schatten(p, gamma)?;
        let triple = svd(xk)?;
        let inverse_weights = triple
            .sigma
            .iter()
            .map(|s| (s * s + gamma).powf(0.5 - p / 4.0))
            .collect();
        Ok(Self {
            n: triple.side(),
            svd: Some(triple),
            inverse_weights,
            p,
            gamma,
            mode,
        })
    }

    /// Basis-vector variant: factors from the SVD of `unvec(v)`, inverse
    /// weights `σ_i^{1/2 − p/4}` applied to the singular values themselves.
    pub fn from_basis(v: &[f64], n: usize, p: f64, gamma: f64, mode: PowerMode) -> Result<Self> {
        check_schatten(p, gamma)?;
        if v.iter().all(|&e| e == 0.0) {
            return Err(Error::ZeroVector("basis vector for reweighting"));
        }
        let triple = svd(&unvec(v, n)?)?;
        let inverse_weights = triple.sigma.iter().map(|s| s.powf(0.5 - p / 4.0)).collect();
        Ok(Self {
            n,
            svd: Some(triple),
            inverse_weights,
            p,
            gamma,
            mode,
        })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> PowerMode {
        self.mode
    }

    pub fn svd(&self) -> Option<&SvdTriple> {
        self.svd.as_ref()
    }

    pub fn is_identity(&self) -> bool {
        self.svd.is_none()
    }

    /// Diagonal of `D` (the weights of `W = I ⊗ D`).
    pub fn weights(&self) -> Vec<f64> {
        self.inverse_weights.iter().map(|w| 1.0 / w).collect()
    }

    fn scale_rows(&self, y: &mut DMatrix<f64>, power: i32) {
        if power == 0 || self.svd.is_none() {
            return;
        }
        for (i, w) in self.inverse_weights.iter().enumerate() {
            let f = w.powi(-power);
            y.row_mut(i).scale_mut(f);
        }
    }

    /// `W^q S v`
    pub fn to_singular_domain(&self, v: &[f64], power: i32) -> Result<Vec<f64>> {
        check_len("reweighter input", self.n * self.n, v.len())?;
        let Some(t) = &self.svd else {
            return Ok(v.to_vec());
        };
        let mut y = t.u.transpose() * unvec(v, self.n)? * &t.v;
        self.scale_rows(&mut y, power);
        Ok(vec(&y))
    }

    /// `Sᵀ W^q v`
    pub fn from_singular_domain(&self, v: &[f64], power: i32) -> Result<Vec<f64>> {
        check_len("reweighter input", self.n * self.n, v.len())?;
        let Some(t) = &self.svd else {
            return Ok(v.to_vec());
        };
        let mut y = unvec(v, self.n)?;
        self.scale_rows(&mut y, power);
        Ok(vec(&(&t.u * y * t.v.transpose())))
    }

    pub fn apply_transform(&self, v: &[f64], direction: Direction, power: i32) -> Result<Vec<f64>> {
        match direction {
            Direction::S => self.to_singular_domain(v, power),
            Direction::STranspose => self.from_singular_domain(v, power),
        }
    }

    /// `Sᵀ W^q S v`
    pub fn sandwich(&self, v: &[f64], power: i32) -> Result<Vec<f64>> {
        check_len("reweighter input", self.n * self.n, v.len())?;
        let Some(t) = &self.svd else {
            return Ok(v.to_vec());
        };
        let mut y = t.u.transpose() * unvec(v, self.n)? * &t.v;
        self.scale_rows(&mut y, power);
        Ok(vec(&(&t.u * y * t.v.transpose())))
    }

    /// Flexible preconditioner `Sᵀ W^q S v` with `q` set by the power mode.
    pub fn precondition(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.sandwich(v, self.mode.net_power())
    }
}
