use super::generators::{inpainting_problem, phantom_problem, star_problem, InpaintingParams};
use super::pgm::write_pgm16;
use super::TestProblem;
use crate::error::{invalid, Error, Result};
use crate::linops::unvec;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Everything needed to regenerate a [`TestProblem`] bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Star {
        n: usize,
        noise_level: f64,
        sigma_blur: f64,
        seed: u64,
    },
    Phantom {
        n: usize,
        noise_level: f64,
        angle_span_degrees: f64,
        n_angles: usize,
        seed: u64,
    },
    Inpainting(InpaintingParams),
}

impl ProblemSpec {
    pub fn build(&self) -> Result<TestProblem> {
        match self {
            ProblemSpec::Star {
                n,
                noise_level,
                sigma_blur,
                seed,
            } => star_problem(*n, *noise_level, *sigma_blur, *seed),
            ProblemSpec::Phantom {
                n,
                noise_level,
                angle_span_degrees,
                n_angles,
                seed,
            } => phantom_problem(*n, *noise_level, *angle_span_degrees, *n_angles, *seed),
            ProblemSpec::Inpainting(p) => inpainting_problem(p),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ProblemSpec::Star { seed, .. } | ProblemSpec::Phantom { seed, .. } => *seed,
            ProblemSpec::Inpainting(p) => p.seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            ProblemSpec::Star { seed, .. } | ProblemSpec::Phantom { seed, .. } => *seed = new_seed,
            ProblemSpec::Inpainting(p) => p.seed = new_seed,
        }
        self
    }

    pub fn side(&self) -> usize {
        match self {
            ProblemSpec::Star { n, .. } | ProblemSpec::Phantom { n, .. } => *n,
            ProblemSpec::Inpainting(p) => p.n,
        }
    }
}

/// Contents of `problem.json` in an exported problem directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemMetadata {
    pub spec: ProblemSpec,
    pub rows: usize,
    pub cols: usize,
    pub noise_norm: f64,
    /// `(min, max)` mapped onto the 16-bit range of `x_exact.pgm`.
    pub x_exact_range: (f64, f64),
}

impl ProblemMetadata {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Write `problem.json` and `x_exact.pgm` into `dir` (created if needed).
pub fn export_problem(problem: &TestProblem, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let img = unvec(&problem.x_exact, problem.side())?;
    let range = write_pgm16(std::io::BufWriter::new(std::fs::File::create(dir.join("x_exact.pgm"))?), &img)?;
    let meta = ProblemMetadata {
        spec: problem.spec.clone(),
        rows: problem.op.rows(),
        cols: problem.op.cols(),
        noise_norm: problem.noise_norm(),
        x_exact_range: range,
    };
    std::fs::write(dir.join("problem.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Regenerate a problem from an exported directory, checking the recorded
/// shape.
pub fn import_problem(dir: &Path) -> Result<TestProblem> {
    let meta = ProblemMetadata::parse(&std::fs::read_to_string(dir.join("problem.json"))?)?;
    let problem = meta.spec.build()?;
    if problem.op.rows() != meta.rows || problem.op.cols() != meta.cols {
        return Err(invalid(
            "problem.json",
            format!(
                "recorded shape {}x{} does not match regenerated {}x{}",
                meta.rows,
                meta.cols,
                problem.op.rows(),
                problem.op.cols()
            ),
        ));
    }
    let drift = (problem.noise_norm() - meta.noise_norm).abs();
    if drift > 1e-12 * meta.noise_norm.max(1.0) {
        return Err(Error::Parse(format!("noise norm differs from the recorded value by {drift:e}")));
    }
    Ok(problem)
}
