use crate::error::{invalid, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const MASK_STREAM: u64 = 2;

/// Which pixels an inpainting problem observes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaskSpec {
    /// Every pixel observed.
    All,
    /// Uniformly scattered missing pixels. Give exactly one of the two
    /// fractions; the kept count is `ceil(keep · N)`.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        missing_fraction: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        keep_fraction: Option<f64>,
    },
    /// Missing disks, squares and rectangles at random positions.
    Structured { shapes: usize, max_radius: usize },
}

impl MaskSpec {
    pub fn missing(fraction: f64) -> Self {
        MaskSpec::Random {
            missing_fraction: Some(fraction),
            keep_fraction: None,
        }
    }

    pub fn build(&self, n: usize, seed: u64) -> Result<Vec<bool>> {
        match self {
            MaskSpec::All => Ok(vec![true; n * n]),
            MaskSpec::Random {
                missing_fraction,
                keep_fraction,
            } => {
                let keep = match (missing_fraction, keep_fraction) {
                    (Some(m), None) => 1.0 - m,
                    (None, Some(k)) => *k,
                    _ => return Err(invalid("mask", "give exactly one of missing_fraction and keep_fraction")),
                };
                random_mask(n, keep, seed)
            }
            MaskSpec::Structured { shapes, max_radius } => structured_mask(n, *shapes, *max_radius, seed),
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MASK_STREAM);
    rng
}

/// Keep exactly `ceil(keep · n²)` pixels chosen by a seeded shuffle.
pub fn random_mask(n: usize, keep: f64, seed: u64) -> Result<Vec<bool>> {
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(invalid("mask", format!("kept fraction must lie in (0, 1], got {keep}")));
    }
    let total = n * n;
    let count = ((keep * total as f64).ceil() as usize).clamp(1, total);
    let mut idx: Vec<usize> = (0..total).collect();
    idx.shuffle(&mut rng_for(seed));
    let mut mask = vec![false; total];
    for &i in &idx[..count] {
        mask[i] = true;
    }
    Ok(mask)
}

/// Remove `shapes` random disks, squares and rectangles with extent up to
/// `max_radius` pixels.
pub fn structured_mask(n: usize, shapes: usize, max_radius: usize, seed: u64) -> Result<Vec<bool>> {
    if max_radius == 0 || max_radius >= n {
        return Err(invalid("mask", format!("max_radius must lie in 1..{n}, got {max_radius}")));
    }
    let mut rng = rng_for(seed);
    let mut mask = vec![true; n * n];
    for s in 0..shapes {
        let (ci, cj) = (rng.random_range(0..n) as isize, rng.random_range(0..n) as isize);
        let r = rng.random_range(1..=max_radius) as isize;
        let r2 = rng.random_range(1..=max_radius) as isize;
        for di in -r..=r {
            for dj in -r..=r {
                let inside = match s % 3 {
                    0 => di * di + dj * dj <= r * r,
                    1 => true,
                    _ => dj.abs() <= r2 / 2,
                };
                let (i, j) = (ci + di, cj + dj);
                if inside && (0..n as isize).contains(&i) && (0..n as isize).contains(&j) {
                    mask[i as usize + j as usize * n] = false;
                }
            }
        }
    }
    if !mask.iter().any(|&m| m) {
        return Err(invalid("mask", "structured pattern removed every pixel"));
    }
    Ok(mask)
}
