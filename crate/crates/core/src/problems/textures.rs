//! Synthetic piecewise-smooth stand-ins for natural test images, values in
//! `[0, 1]`, indexed `X[(row, col)]` with row 0 at the top.

use nalgebra::DMatrix;

fn smoothstep(edge: f64, width: f64, t: f64) -> f64 {
    let s = ((t - edge) / width + 0.5).clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Sky gradient, a house body with windows and a door, a pitched roof and
/// a lawn.
pub fn house_like(n: usize) -> DMatrix<f64> {
    let soft = 0.6 / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        let (y, x) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
        let inside = |x0: f64, x1: f64, y0: f64, y1: f64| {
            smoothstep(x0, soft, x) * (1.0 - smoothstep(x1, soft, x)) * smoothstep(y0, soft, y) * (1.0 - smoothstep(y1, soft, y))
        };
        let sky = 0.75 - 0.35 * y;
        let lawn = smoothstep(0.82, soft, y);
        let mut v = sky * (1.0 - lawn) + (0.35 + 0.05 * (9.0 * x).sin()) * lawn;
        let body = inside(0.2, 0.8, 0.45, 0.85);
        v = v * (1.0 - body) + (0.55 + 0.1 * x) * body;
        // roof: triangle above the body
        let roof_h = 0.45 - 0.25 * (1.0 - ((x - 0.5).abs() / 0.35)).max(0.0);
        let roof = smoothstep(0.15, soft, x) * (1.0 - smoothstep(0.85, soft, x)) * smoothstep(roof_h, soft, y) * (1.0 - smoothstep(0.45, soft, y));
        v = v * (1.0 - roof) + 0.2 * roof;
        for (x0, x1) in [(0.27, 0.4), (0.6, 0.73)] {
            let w = inside(x0, x1, 0.52, 0.64);
            v = v * (1.0 - w) + 0.92 * w;
        }
        let door = inside(0.45, 0.55, 0.62, 0.85);
        v * (1.0 - door) + 0.1 * door
    })
}

/// Overlapping shaded ellipses of varying brightness on a dark background.
pub fn peppers_like(n: usize) -> DMatrix<f64> {
    let blobs = [
        (0.30, 0.35, 0.24, 0.18, 0.5, 0.85),
        (0.62, 0.30, 0.20, 0.26, -0.4, 0.55),
        (0.48, 0.68, 0.28, 0.20, 0.2, 0.7),
        (0.80, 0.75, 0.16, 0.14, 0.9, 0.4),
        (0.18, 0.78, 0.14, 0.20, -0.7, 0.95),
    ];
    let soft = 0.04;
    DMatrix::from_fn(n, n, |i, j| {
        let (y, x) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
        let mut v = 0.12 + 0.06 * (3.0 * x + 2.0 * y).sin();
        for &(cx, cy, a, b, rot, level) in &blobs {
            let (c, s) = (f64::cos(rot), f64::sin(rot));
            let (dx, dy) = (x - cx, y - cy);
            let (u, w) = ((c * dx + s * dy) / a, (-s * dx + c * dy) / b);
            let r = (u * u + w * w).sqrt();
            let m = 1.0 - smoothstep(1.0, soft / a.min(b), r);
            // highlight toward the upper-left rim
            let shade = level * (1.0 - 0.35 * r * r) + 0.08 * (1.0 - (u + w + 1.0).abs()).max(0.0);
            v = v * (1.0 - m) + shade * m;
        }
        v.clamp(0.0, 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textures_are_bounded_and_not_low_rank() {
        for img in [house_like(64), peppers_like(64)] {
            assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
            let s = crate::linalg::singular_values_of(&img).unwrap();
            assert!(s[10] > 1e-6 * s[0], "texture is too simple");
        }
    }
}
