use super::{LinearOperator, OperatorKind};
use crate::error::{check_len, invalid, Result};

/// Blur followed by pixel selection: `A = Sel · A_blur`.
pub struct InpaintingOperator {
    blur: Box<dyn LinearOperator>,
    kept: Vec<usize>,
    n: usize,
}

pub fn inpainting_operator(n: usize, mask: &[bool], blur: Box<dyn LinearOperator>) -> Result<InpaintingOperator> {
    check_len("inpainting mask", n * n, mask.len())?;
    if blur.rows() != n * n || blur.cols() != n * n {
        return Err(invalid(
            "blur",
            format!("expected {}x{} operator, got {}x{}", n * n, n * n, blur.rows(), blur.cols()),
        ));
    }
    let kept: Vec<usize> = mask.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect();
    if kept.is_empty() {
        return Err(invalid("mask", "mask keeps no pixels"));
    }
    Ok(InpaintingOperator { blur, kept, n })
}

impl InpaintingOperator {
    /// Indices (into `vec(X)`) of the observed pixels.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn blur(&self) -> &dyn LinearOperator {
        self.blur.as_ref()
    }
}

impl LinearOperator for InpaintingOperator {
    fn rows(&self) -> usize {
        self.kept.len()
    }
    fn cols(&self) -> usize {
        self.n * self.n
    }
    fn image_side(&self) -> usize {
        self.n
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Inpainting
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let blurred = self.blur.apply(x);
        for (yi, &k) in y.iter_mut().zip(&self.kept) {
            *yi = blurred[k];
        }
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        let mut scattered = vec![0.0; self.n * self.n];
        for (&yi, &k) in y.iter().zip(&self.kept) {
            scattered[k] = yi;
        }
        self.blur.apply_adjoint_into(&scattered, x);
    }
}
