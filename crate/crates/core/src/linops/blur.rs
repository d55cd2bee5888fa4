use super::{LinearOperator, OperatorKind};
use crate::error::{invalid, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Separable blur `A = A_c ⊗ A_r` acting as `X ↦ A_r X A_cᵀ`.
///
/// Zero (Dirichlet) boundary: the Toeplitz band is simply truncated at the
/// image edge before the rows are renormalized.
#[derive(Debug, Clone)]
pub struct SeparableBlurOperator {
    n: usize,
    a_r: DMatrix<f64>,
    a_c: DMatrix<f64>,
}

impl SeparableBlurOperator {
    pub fn from_factors(a_r: DMatrix<f64>, a_c: DMatrix<f64>) -> Result<Self> {
        let n = a_r.nrows();
        if !a_r.is_square() || a_c.shape() != (n, n) {
            return Err(invalid("blur factors", "factors must both be n×n"));
        }
        Ok(Self { n, a_r, a_c })
    }

    pub fn row_factor(&self) -> &DMatrix<f64> {
        &self.a_r
    }

    pub fn column_factor(&self) -> &DMatrix<f64> {
        &self.a_c
    }
}

/// Banded, row-normalized Gaussian Toeplitz factor.
fn gaussian_factor(n: usize, sigma: f64, bandwidth: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let lo = i.saturating_sub(bandwidth);
        let hi = (i + bandwidth).min(n - 1);
        let mut sum = 0.0;
        for j in lo..=hi {
            let d = i as f64 - j as f64;
            let w = (-d * d / (2.0 * sigma * sigma)).exp();
            a[(i, j)] = w;
            sum += w;
        }
        for j in lo..=hi {
            a[(i, j)] /= sum;
        }
    }
    a
}

/// Gaussian blur of an `n×n` image with standard deviation `sigma` pixels,
/// truncated at `|i − j| > bandwidth`. `bandwidth = 0` gives the identity.
pub fn gaussian_blur_operator(n: usize, sigma: f64, bandwidth: usize) -> Result<SeparableBlurOperator> {
    if n == 0 {
        return Err(invalid("n", "image side must be positive"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    if bandwidth > n {
        return Err(invalid("bandwidth", format!("{bandwidth} exceeds image side {n}")));
    }
    let a = gaussian_factor(n, sigma, bandwidth);
    Ok(SeparableBlurOperator {
        n,
        a_r: a.clone(),
        a_c: a,
    })
}

impl LinearOperator for SeparableBlurOperator {
    fn rows(&self) -> usize {
        self.n * self.n
    }
    fn cols(&self) -> usize {
        self.n * self.n
    }
    fn image_side(&self) -> usize {
        self.n
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Blur
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let xm = DMatrix::from_column_slice(self.n, self.n, x);
        let out = &self.a_r * xm * self.a_c.transpose();
        y.copy_from_slice(out.as_slice());
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        let ym = DMatrix::from_column_slice(self.n, self.n, y);
        let out = self.a_r.transpose() * ym * &self.a_c;
        x.copy_from_slice(out.as_slice());
    }
}

/// Shift-invariant blur with an explicit (odd-sized) point spread function
/// and zero boundary conditions.
#[derive(Debug, Clone)]
pub struct PsfBlurOperator {
    n: usize,
    psf: DMatrix<f64>,
}

impl PsfBlurOperator {
    pub fn new(n: usize, psf: DMatrix<f64>) -> Result<Self> {
        if psf.nrows() % 2 == 0 || psf.ncols() % 2 == 0 {
            return Err(invalid("psf", "point spread function must have odd dimensions"));
        }
        if psf.iter().any(|v| !v.is_finite()) {
            return Err(invalid("psf", "non-finite entries"));
        }
        Ok(Self { n, psf })
    }

    pub fn psf(&self) -> &DMatrix<f64> {
        &self.psf
    }

    fn convolve(&self, x: &[f64], y: &mut [f64], adjoint: bool) {
        let n = self.n as isize;
        let (pr, pc) = (self.psf.nrows() as isize / 2, self.psf.ncols() as isize / 2);
        y.fill(0.0);
        for ((k, l), &w) in self.psf.iter().enumerate().map(|(idx, w)| {
            let rows = self.psf.nrows();
            ((idx % rows, idx / rows), w)
        }) {
            if w == 0.0 {
                continue;
            }
            let (mut di, mut dj) = (k as isize - pr, l as isize - pc);
            if adjoint {
                di = -di;
                dj = -dj;
            }
            // y(i, j) += w * x(i - di, j - dj)
            for j in 0..n {
                let sj = j - dj;
                if sj < 0 || sj >= n {
                    continue;
                }
                for i in 0..n {
                    let si = i - di;
                    if si < 0 || si >= n {
                        continue;
                    }
                    y[(i + j * n) as usize] += w * x[(si + sj * n) as usize];
                }
            }
        }
    }
}

impl LinearOperator for PsfBlurOperator {
    fn rows(&self) -> usize {
        self.n * self.n
    }
    fn cols(&self) -> usize {
        self.n * self.n
    }
    fn image_side(&self) -> usize {
        self.n
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Blur
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.convolve(x, y, false)
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        self.convolve(y, x, true)
    }
}

/// Random-walk "camera shake" point spread function on a `(2r+1)²` grid,
/// normalized to unit sum.
pub fn shaking_psf(radius: usize, steps: usize, seed: u64) -> DMatrix<f64> {
    let size = 2 * radius + 1;
    let mut psf = DMatrix::<f64>::zeros(size, size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut i, mut j) = (radius as isize, radius as isize);
    psf[(radius, radius)] += 1.0;
    for _ in 0..steps {
        let di = rng.random_range(-1i32..=1) as isize;
        let dj = rng.random_range(-1i32..=1) as isize;
        i = (i + di).clamp(0, size as isize - 1);
        j = (j + dj).clamp(0, size as isize - 1);
        psf[(i as usize, j as usize)] += 1.0;
    }
    let total = psf.sum();
    psf / total
}
