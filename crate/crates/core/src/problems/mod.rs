//! Deterministic test problems, noise, metrics and image I/O.

mod generators;
mod masks;
mod metadata;
mod metrics;
pub mod pgm;
mod textures;

pub use generators::{
    inpainting_problem, phantom_image, phantom_problem, star_image, star_problem, BlurSpec, ImageSource, InpaintingParams,
};
pub use masks::{random_mask, structured_mask, MaskSpec};
pub use metadata::{export_problem, import_problem, ProblemMetadata, ProblemSpec};
pub use metrics::{export_spectrum, normalized_spectrum, relative_error, EXPORT_SPECTRUM_FLOOR};
pub use textures::{house_like, peppers_like};

use crate::linalg::{norm2, sub};
use crate::linops::LinearOperator;
use std::sync::Arc;

/// A generated inverse problem `b = A x_exact + η`.
#[derive(Clone)]
pub struct TestProblem {
    pub op: Arc<dyn LinearOperator>,
    pub b: Vec<f64>,
    pub b_exact: Vec<f64>,
    pub x_exact: Vec<f64>,
    /// `‖η‖₂ / ‖b_exact‖₂`
    pub noise_level: f64,
    pub seed: u64,
    /// Parameters that regenerate this problem.
    pub spec: ProblemSpec,
}

impl TestProblem {
    pub fn side(&self) -> usize {
        self.op.image_side()
    }

    /// `‖η‖₂`, the discrepancy principle's noise estimate.
    pub fn noise_norm(&self) -> f64 {
        norm2(&sub(&self.b, &self.b_exact))
    }
}

impl std::fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestProblem")
            .field("kind", &self.op.kind())
            .field("rows", &self.op.rows())
            .field("cols", &self.op.cols())
            .field("noise_level", &self.noise_level)
            .field("seed", &self.seed)
            .finish()
    }
}
