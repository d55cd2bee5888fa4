use lrk_core::problems::pgm::{decode_pgm, read_pgm, write_pgm16};
use lrk_core::problems::{
    export_problem, import_problem, inpainting_problem, phantom_problem, relative_error, star_problem, BlurSpec,
    ImageSource, InpaintingParams, MaskSpec, ProblemMetadata, ProblemSpec,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn specs(seed: u64) -> Vec<ProblemSpec> {
    vec![
        ProblemSpec::Star {
            n: 16,
            noise_level: 1e-2,
            sigma_blur: 1.5,
            seed,
        },
        ProblemSpec::Phantom {
            n: 16,
            noise_level: 1e-2,
            angle_span_degrees: 90.0,
            n_angles: 8,
            seed,
        },
        ProblemSpec::Inpainting(InpaintingParams {
            image: ImageSource::PeppersLike,
            n: 16,
            rank_cap: 5,
            mask: MaskSpec::Structured {
                shapes: 3,
                max_radius: 3,
            },
            blur: BlurSpec::Shaking { radius: 1, steps: 5 },
            noise_level: 1e-2,
            seed,
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generators_are_deterministic(seed in any::<u64>()) {
        for spec in specs(seed) {
            let (a, b) = (spec.build().unwrap(), spec.build().unwrap());
            prop_assert_eq!(&a.b, &b.b);
            prop_assert_eq!(&a.x_exact, &b.x_exact);
            let noise: Vec<f64> = a.b.iter().zip(&a.b_exact).map(|(x, y)| x - y).collect();
            let bn = a.b_exact.iter().map(|v| v * v).sum::<f64>().sqrt();
            let en = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((en - 1e-2 * bn).abs() <= 1e-12 * bn);
        }
    }

    #[test]
    fn pgm_round_trip_is_within_quantization(n in 1usize..12, vals in proptest::collection::vec(-5.0f64..5.0, 144)) {
        let img = DMatrix::from_fn(n, n, |i, j| vals[i * n + j]);
        let mut buf = Vec::new();
        let (lo, hi) = write_pgm16(&mut buf, &img).unwrap();
        let back = read_pgm(buf.as_slice()).unwrap();
        prop_assert_eq!(back.shape(), (n, n));
        let step = if hi > lo { (hi - lo) / 65535.0 } else { 0.0 };
        for (a, b) in img.iter().zip(back.iter()) {
            let restored = lo + b * (hi - lo);
            prop_assert!((a - restored).abs() <= step + 1e-12);
        }
    }

    #[test]
    fn pgm_decoder_never_panics(data in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode_pgm(&data);
        let mut header = b"P5 3 3 255\n".to_vec();
        header.extend_from_slice(&data);
        let _ = decode_pgm(&header);
    }

    #[test]
    fn metadata_parser_never_panics(text in "\\PC{0,80}") {
        let _ = ProblemMetadata::parse(&text);
    }
}

#[test]
fn noise_is_uncorrelated() {
    let p = star_problem(100, 1e-2, 1.5, 9).unwrap();
    let noise: Vec<f64> = p.b.iter().zip(&p.b_exact).map(|(x, y)| x - y).collect();
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let centered: Vec<f64> = noise.iter().map(|v| v - mean).collect();
    let var: f64 = centered.iter().map(|v| v * v).sum();
    for lag in [1, 2, 100] {
        let cov: f64 = centered.windows(lag + 1).map(|w| w[0] * w[lag]).sum();
        assert!((cov / var).abs() <= 0.05, "lag {lag}: {}", cov / var);
    }
}

#[test]
fn seeds_change_the_noise_only() {
    let a = phantom_problem(16, 1e-2, 90.0, 8, 1).unwrap();
    let b = phantom_problem(16, 1e-2, 90.0, 8, 2).unwrap();
    assert_eq!(a.x_exact, b.x_exact);
    assert_eq!(a.b_exact, b.b_exact);
    assert_ne!(a.b, b.b);
}

#[test]
fn export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, spec) in specs(4).into_iter().enumerate() {
        let sub = dir.path().join(i.to_string());
        std::fs::create_dir_all(&sub).unwrap();
        let p = spec.build().unwrap();
        export_problem(&p, &sub).unwrap();
        let q = import_problem(&sub).unwrap();
        assert_eq!(p.b, q.b);
        assert_eq!(p.spec, q.spec);
        let img = read_pgm(std::fs::File::open(sub.join("x_exact.pgm")).unwrap()).unwrap();
        assert_eq!(img.shape(), (16, 16));
    }
}

#[test]
fn metric_examples() {
    let xe = [1.0, 2.0, -2.0];
    assert_eq!(relative_error(&xe, &xe).unwrap(), 0.0);
    assert_eq!(relative_error(&[0.0; 3], &xe).unwrap(), 1.0);
    assert_eq!(relative_error(&[2.0, 4.0, -4.0], &xe).unwrap(), 1.0);
    assert!(relative_error(&xe, &[0.0; 3]).is_err());
}

#[test]
fn file_image_source_feeds_inpainting() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("img.pgm");
    let img = DMatrix::from_fn(12, 12, |i, j| ((i + 2 * j) % 7) as f64);
    write_pgm16(std::fs::File::create(&path).unwrap(), &img).unwrap();
    let p = inpainting_problem(&InpaintingParams {
        image: ImageSource::File { path },
        n: 12,
        rank_cap: 12,
        mask: MaskSpec::All,
        blur: BlurSpec::None,
        noise_level: 0.0,
        seed: 0,
    })
    .unwrap();
    assert_eq!(p.b, p.b_exact);
    assert_eq!(p.op.rows(), 144);
}
