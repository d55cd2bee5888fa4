use super::metadata::ProblemSpec;
use super::pgm::read_pgm;
use super::textures::{house_like, peppers_like};
use super::{MaskSpec, TestProblem};
use crate::error::{invalid, Result};
use crate::linalg::norm2;
use crate::linops::{
    gaussian_blur_operator, inpainting_operator, shaking_psf, tomography_operator, vec, LinearOperator,
    PsfBlurOperator,
};
use crate::lowrank::truncate;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

const NOISE_STREAM: u64 = 1;
const PSF_STREAM_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// `η` drawn from a seeded standard normal and rescaled so that
/// `‖η‖₂ = level · ‖b_exact‖₂` exactly.
pub(crate) fn add_noise(b_exact: &[f64], level: f64, seed: u64) -> Result<Vec<f64>> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(invalid("noise_level", format!("must be finite and nonnegative, got {level}")));
    }
    if level == 0.0 {
        return Ok(b_exact.to_vec());
    }
    let scale_to = level * norm2(b_exact);
    if scale_to == 0.0 {
        return Err(invalid("noise_level", "relative noise is undefined for zero exact data"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let eta: Vec<f64> = (0..b_exact.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let f = scale_to / norm2(&eta);
    Ok(b_exact.iter().zip(&eta).map(|(b, e)| b + f * e).collect())
}

fn assemble_problem(op: Arc<dyn LinearOperator>, x_exact: Vec<f64>, noise_level: f64, seed: u64, spec: ProblemSpec) -> Result<TestProblem> {
    let b_exact = op.apply(&x_exact);
    let b = add_noise(&b_exact, noise_level, seed)?;
    Ok(TestProblem {
        op,
        b,
        b_exact,
        x_exact,
        noise_level,
        seed,
        spec,
    })
}

fn gaussian(n: usize, center: f64, width: f64) -> DVector<f64> {
    DVector::from_fn(n, |i, _| {
        let t = (i as f64 + 0.5 - center) / width;
        (-0.5 * t * t).exp()
    })
}

/// Exactly rank-2 "binary star": two Gaussian spots, each an outer product.
pub fn star_image(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    let a = gaussian(n, 0.42 * nf, 0.015 * nf) * gaussian(n, 0.38 * nf, 0.015 * nf).transpose();
    let b = gaussian(n, 0.58 * nf, 0.01 * nf) * gaussian(n, 0.63 * nf, 0.01 * nf).transpose();
    a + b * 0.8
}

/// Blurred and noisy binary star, `A` a separable Gaussian blur truncated
/// at `ceil(3σ)` pixels.
pub fn star_problem(n: usize, noise_level: f64, sigma_blur: f64, seed: u64) -> Result<TestProblem> {
    if n < 16 {
        return Err(invalid("n", format!("star problem needs n >= 16, got {n}")));
    }
    let bandwidth = ((3.0 * sigma_blur).ceil() as usize).min(n);
    let op = gaussian_blur_operator(n, sigma_blur, bandwidth)?;
    let spec = ProblemSpec::Star {
        n,
        noise_level,
        sigma_blur,
        seed,
    };
    assemble_problem(Arc::new(op), vec(&star_image(n)), noise_level, seed, spec)
}

fn bump(n: usize, center: f64, width: f64) -> DVector<f64> {
    DVector::from_fn(n, |i, _| {
        let t = (i as f64 + 0.5 - center) / width;
        let v = (1.0 - t * t).max(0.0);
        v * v
    })
}

/// Smooth rank-4 phantom: four separable bumps.
pub fn phantom_image(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    let terms = [
        (0.35, 0.25, 0.40, 0.28, 1.0),
        (0.62, 0.20, 0.60, 0.22, 0.8),
        (0.50, 0.40, 0.50, 0.42, 0.5),
        (0.30, 0.12, 0.70, 0.14, 0.6),
    ];
    let mut x = DMatrix::zeros(n, n);
    for (rc, rw, cc, cw, amp) in terms {
        x += bump(n, rc * nf, rw * nf) * bump(n, cc * nf, cw * nf).transpose() * amp;
    }
    x
}

/// Limited-angle parallel-beam tomography of the rank-4 phantom.
///
/// `n_angles` equispaced angles cover `[0°, span]`; the detector has
/// `round(√2 n)` unit-spaced cells.
pub fn phantom_problem(n: usize, noise_level: f64, angle_span_degrees: f64, n_angles: usize, seed: u64) -> Result<TestProblem> {
    if n < 2 {
        return Err(invalid("n", format!("phantom problem needs n >= 2, got {n}")));
    }
    if !(angle_span_degrees > 0.0 && angle_span_degrees < 180.0) {
        return Err(invalid(
            "angle_span_degrees",
            format!("must lie in (0, 180), got {angle_span_degrees}"),
        ));
    }
    if n_angles == 0 {
        return Err(invalid("n_angles", "at least one angle is required"));
    }
    let angles: Vec<f64> = (0..n_angles)
        .map(|k| {
            let frac = if n_angles == 1 { 0.0 } else { k as f64 / (n_angles - 1) as f64 };
            (frac * angle_span_degrees).to_radians()
        })
        .collect();
    let detectors = (std::f64::consts::SQRT_2 * n as f64).round() as usize;
    let op = tomography_operator(n, &angles, detectors)?;
    let spec = ProblemSpec::Phantom {
        n,
        noise_level,
        angle_span_degrees,
        n_angles,
        seed,
    };
    assemble_problem(Arc::new(op), vec(&phantom_image(n)), noise_level, seed, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ImageSource {
    HouseLike,
    PeppersLike,
    /// An `n×n` PGM file.
    File { path: PathBuf },
}

impl ImageSource {
    pub fn load(&self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            ImageSource::HouseLike => Ok(house_like(n)),
            ImageSource::PeppersLike => Ok(peppers_like(n)),
            ImageSource::File { path } => {
                let img = read_pgm(std::fs::File::open(path)?)?;
                if img.nrows() != n || img.ncols() != n {
                    return Err(invalid(
                        "image",
                        format!("{} is {}x{}, expected {n}x{n}", path.display(), img.nrows(), img.ncols()),
                    ));
                }
                Ok(img)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BlurSpec {
    None,
    Gaussian { sigma: f64 },
    /// Random-walk camera shake PSF on a `(2r+1)²` grid.
    Shaking { radius: usize, steps: usize },
}

impl BlurSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<Box<dyn LinearOperator>> {
        Ok(match self {
            BlurSpec::None => Box::new(gaussian_blur_operator(n, 1.0, 0)?),
            BlurSpec::Gaussian { sigma } => {
                Box::new(gaussian_blur_operator(n, *sigma, ((3.0 * sigma).ceil() as usize).min(n))?)
            }
            BlurSpec::Shaking { radius, steps } => {
                if 2 * radius + 1 > n {
                    return Err(invalid("blur", format!("shake radius {radius} too large for n = {n}")));
                }
                let psf = shaking_psf(*radius, *steps, seed.wrapping_add(PSF_STREAM_OFFSET));
                Box::new(PsfBlurOperator::new(n, psf)?)
            }
        })
    }
}

/// Parameters of an inpainting problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InpaintingParams {
    pub image: ImageSource,
    pub n: usize,
    pub rank_cap: usize,
    pub mask: MaskSpec,
    pub blur: BlurSpec,
    pub noise_level: f64,
    pub seed: u64,
}

/// Blur-then-subsample problem on a rank-capped image.
pub fn inpainting_problem(params: &InpaintingParams) -> Result<TestProblem> {
    let n = params.n;
    if n < 2 {
        return Err(invalid("n", format!("inpainting problem needs n >= 2, got {n}")));
    }
    if params.rank_cap == 0 || params.rank_cap > n {
        return Err(invalid("rank_cap", format!("must lie in 1..={n}, got {}", params.rank_cap)));
    }
    let source = params.image.load(n)?;
    let x_exact = truncate(&vec(&source), n, params.rank_cap)?;
    let mask = params.mask.build(n, params.seed)?;
    let blur = params.blur.build(n, params.seed)?;
    let op = inpainting_operator(n, &mask, blur)?;
    assemble_problem(
        Arc::new(op),
        x_exact,
        params.noise_level,
        params.seed,
        ProblemSpec::Inpainting(params.clone()),
    )
}
