use super::{LinearOperator, OperatorKind};
use crate::error::{invalid, Result};

/// Parallel-beam projector with exact (Siddon) chord-length weights.
///
/// The image occupies `[-n/2, n/2]²` with unit pixels, row 0 at the top.
/// For angle `θ` the detector axis is `(cos θ, sin θ)` and rays travel along
/// `(-sin θ, cos θ)`, so at `θ = 0` each ray runs down one pixel column.
/// Detectors are spaced one pixel apart and centered on the origin. Rows
/// of the operator are ordered angle-major: `row = a * detector_count + d`.
#[derive(Debug, Clone)]
pub struct TomographyOperator {
    n: usize,
    angles: Vec<f64>,
    detector_count: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

pub fn tomography_operator(n: usize, angles: &[f64], detector_count: usize) -> Result<TomographyOperator> {
    if n == 0 {
        return Err(invalid("n", "image side must be positive"));
    }
    if angles.is_empty() {
        return Err(invalid("angles", "at least one projection angle is required"));
    }
    if detector_count == 0 {
        return Err(invalid("detector_count", "must be at least 1"));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(invalid("angles", "non-finite angle"));
    }
    let mut offsets = Vec::with_capacity(angles.len() * detector_count + 1);
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    offsets.push(0);
    let mut ts = Vec::with_capacity(2 * n + 4);
    for &theta in angles {
        for d in 0..detector_count {
            let s = d as f64 - (detector_count as f64 - 1.0) / 2.0;
            trace_ray(n, theta, s, &mut ts, &mut indices, &mut weights);
            offsets.push(indices.len());
        }
    }
    Ok(TomographyOperator {
        n,
        angles: angles.to_vec(),
        detector_count,
        offsets,
        indices,
        weights,
    })
}

fn trace_ray(n: usize, theta: f64, s: f64, ts: &mut Vec<f64>, indices: &mut Vec<usize>, weights: &mut Vec<f64>) {
    const EPS: f64 = 1e-12;
    let h = n as f64 / 2.0;
    let (c, sn) = (theta.cos(), theta.sin());
    let (px, py) = (s * c, s * sn);
    let (dx, dy) = (-sn, c);

    // Clip the parametric line to the box.
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < EPS {
            if p <= -h || p >= h {
                return;
            }
        } else {
            let (a, b) = ((-h - p) / d, (h - p) / d);
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    if t_hi - t_lo <= EPS {
        return;
    }

    ts.clear();
    ts.push(t_lo);
    ts.push(t_hi);
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < EPS {
            continue;
        }
        for k in 0..=n {
            let t = (k as f64 - h - p) / d;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.total_cmp(b));

    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= EPS {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let (mx, my) = (px + tm * dx, py + tm * dy);
        let j = (mx + h).floor();
        let i = (h - my).floor();
        if i < 0.0 || j < 0.0 || i >= n as f64 || j >= n as f64 {
            continue;
        }
        indices.push(i as usize + j as usize * n);
        weights.push(len);
    }
}

impl TomographyOperator {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn detector_count(&self) -> usize {
        self.detector_count
    }

    /// Nonzero `(pixel, chord length)` pairs of one ray.
    pub fn ray(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[row], self.offsets[row + 1]);
        self.indices[a..b].iter().copied().zip(self.weights[a..b].iter().copied())
    }
}

impl LinearOperator for TomographyOperator {
    fn rows(&self) -> usize {
        self.angles.len() * self.detector_count
    }
    fn cols(&self) -> usize {
        self.n * self.n
    }
    fn image_side(&self) -> usize {
        self.n
    }
    fn kind(&self) -> OperatorKind {
        OperatorKind::Tomography
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.ray(r).map(|(idx, w)| w * x[idx]).sum();
        }
    }
    fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for (idx, w) in self.ray(r) {
                    x[idx] += w * yr;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{assemble, assemble_adjoint};

    #[test]
    fn vertical_ray_through_one_column() {
        let op = tomography_operator(4, &[0.0], 4).unwrap();
        let ones = vec![1.0; 16];
        let proj = op.apply(&ones);
        for v in &proj {
            assert!((v - 4.0).abs() < 1e-12, "{proj:?}");
        }
        // detector 1 sits over column 1: pixels 4..8, unit chords
        let ray: Vec<_> = op.ray(1).collect();
        assert_eq!(ray.len(), 4);
        for (idx, w) in ray {
            assert!((4..8).contains(&idx));
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_ray_length() {
        let op = tomography_operator(4, &[std::f64::consts::FRAC_PI_4], 1).unwrap();
        let total: f64 = op.apply(&vec![1.0; 16])[0];
        assert!((total - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_image_zero_sinogram() {
        let op = tomography_operator(8, &[0.1, 0.7, 1.3], 12).unwrap();
        assert!(op.apply(&vec![0.0; 64]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_angles_rejected() {
        assert!(tomography_operator(8, &[], 12).is_err());
        assert!(tomography_operator(8, &[0.0], 0).is_err());
    }

    #[test]
    fn adjoint_is_transpose() {
        let angles: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        let op = tomography_operator(16, &angles, 23).unwrap();
        let a = assemble(&op);
        let at = assemble_adjoint(&op);
        assert!((a.transpose() - at).norm() <= 1e-10);
    }
}
