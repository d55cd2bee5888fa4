use lrk_core::linops::{
    assemble, assemble_adjoint, gaussian_blur_operator, inpainting_operator, parse_dense_matrix, shaking_psf,
    tomography_operator, write_dense_matrix, DenseOperator, PsfBlurOperator,
};
use lrk_core::problems::{random_mask, structured_mask};
use lrk_core::LinearOperator;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn adjoint_gap(op: &dyn LinearOperator) -> f64 {
    (assemble(op).transpose() - assemble_adjoint(op)).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blur_adjoint_and_kronecker_form(n in 4usize..=20, sigma in 0.5f64..3.0, bw in 0usize..6) {
        let op = gaussian_blur_operator(n, sigma, bw.min(n - 1)).unwrap();
        prop_assert!(adjoint_gap(&op) <= 1e-10);
        // vec(A_r X A_cᵀ) = (A_c ⊗ A_r) vec(X)
        let kron = op.column_factor().kronecker(op.row_factor());
        prop_assert!((assemble(&op) - kron).amax() <= 1e-12);
    }

    #[test]
    fn psf_blur_adjoint(n in 4usize..=16, radius in 1usize..=3, steps in 1usize..20, seed in any::<u64>()) {
        let op = PsfBlurOperator::new(n, shaking_psf(radius, steps, seed)).unwrap();
        prop_assert!(adjoint_gap(&op) <= 1e-10);
    }

    #[test]
    fn tomography_adjoint(n in 4usize..=16, n_angles in 1usize..12, span in 10.0f64..180.0) {
        let angles: Vec<f64> = (0..n_angles)
            .map(|i| (span * i as f64 / n_angles.max(2).saturating_sub(1) as f64).to_radians())
            .collect();
        let detectors = ((2f64).sqrt() * n as f64).round() as usize;
        let op = tomography_operator(n, &angles, detectors).unwrap();
        prop_assert_eq!(op.rows(), detectors * n_angles);
        prop_assert!(adjoint_gap(&op) <= 1e-10);
    }

    #[test]
    fn inpainting_is_selection_of_blur(n in 4usize..=16, keep in 0.1f64..1.0, seed in any::<u64>(),
                                       x in proptest::collection::vec(-1.0f64..1.0, 256)) {
        let mask = random_mask(n, keep, seed).unwrap();
        let blur = PsfBlurOperator::new(n, shaking_psf(2, 6, seed)).unwrap();
        let x = &x[..n * n];
        let blurred = blur.apply(x);
        let op = inpainting_operator(n, &mask, Box::new(blur)).unwrap();
        prop_assert!(adjoint_gap(&op) <= 1e-10);
        let y = op.apply(x);
        let picked: Vec<f64> = blurred.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| *v).collect();
        prop_assert_eq!(y.len(), picked.len());
        for (a, b) in y.iter().zip(&picked) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn structured_mask_hides_something(n in 8usize..=32, shapes in 1usize..5, seed in any::<u64>()) {
        let mask = structured_mask(n, shapes, n / 4, seed).unwrap();
        prop_assert_eq!(mask.len(), n * n);
        prop_assert!(mask.iter().any(|&m| !m));
        prop_assert!(mask.iter().any(|&m| m));
    }

    #[test]
    fn dense_text_round_trips(rows in 1usize..6, side in 1usize..4,
                              vals in proptest::collection::vec(-1e12f64..1e12, 96)) {
        let m = DMatrix::from_fn(rows, side * side, |i, j| vals[(i * side * side + j) % vals.len()]);
        let mut buf = Vec::new();
        write_dense_matrix(&mut buf, &m).unwrap();
        let back = parse_dense_matrix(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
        let op = DenseOperator::new(back).unwrap();
        prop_assert_eq!(op.image_side(), side);
        prop_assert!(adjoint_gap(&op) == 0.0);
    }

    #[test]
    fn dense_parser_rejects_garbage_without_panicking(text in "\\PC{0,64}") {
        let _ = parse_dense_matrix(&text);
    }
}

#[test]
fn identity_inpainting() {
    let n = 5;
    let op = inpainting_operator(n, &vec![true; n * n], Box::new(gaussian_blur_operator(n, 1.0, 0).unwrap())).unwrap();
    assert_eq!(assemble(&op), DMatrix::identity(n * n, n * n));
}
