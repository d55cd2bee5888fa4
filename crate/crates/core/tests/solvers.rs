use lrk_core::krylov::{gmres, lr_fgmres, lr_flsqr, lsqr, ArnoldiState, GkbState, SolveOptions, Truncation};
use lrk_core::linalg::orthogonality_loss;
use lrk_core::linops::DenseOperator;
use lrk_core::lowrank::{singular_values, PowerMode, Reweighter};
use lrk_core::nnr::{irn_nnrp, svt, IrnInner, LambdaRule, Monitor, NnrConfig, StepSize, SvtState};
use lrk_core::problems::{inpainting_problem, star_problem, BlurSpec, ImageSource, InpaintingParams, MaskSpec};
use lrk_core::{unvec, LinearOperator, SolveReport};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dense(seed: u64, rows: usize, side: usize) -> (DenseOperator, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(rows, side * side, |_, _| rng.random_range(-1.0..1.0));
    let b = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
    (DenseOperator::new(m).unwrap(), b)
}

fn cols(c: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(c[0].len(), c.len(), |i, j| c[j][i])
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn true_residual(op: &dyn LinearOperator, b: &[f64], x: &[f64]) -> f64 {
    let ax = op.apply(x);
    norm(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bases_stay_orthonormal_and_factorizations_hold(seed in any::<u64>(), side in 3usize..=5, extra in 0usize..8) {
        let big = side * side;
        let (op, b) = random_dense(seed, big, side);
        let mv = |x: &[f64]| op.apply(x);
        let steps = (big - 1).min(30);
        let mut arn = ArnoldiState::new(&b).unwrap();
        for _ in 0..steps {
            arn.step(&mv, None).unwrap();
            prop_assert!(orthogonality_loss(arn.basis()) <= 1e-8);
            let az = cols(&arn.solution_basis().iter().map(|z| op.apply(z)).collect::<Vec<_>>());
            prop_assert!((&az - cols(arn.basis()) * arn.hessenberg()).norm() <= 1e-8 * az.norm());
        }
        let (op, b) = random_dense(seed ^ 1, big + extra, side);
        let mv = |x: &[f64]| op.apply(x);
        let at = |y: &[f64]| op.apply_adjoint(y);
        let mut gkb = GkbState::new(&b, &at).unwrap();
        for _ in 0..steps {
            gkb.step(&mv, &at, None).unwrap();
            prop_assert!(orthogonality_loss(gkb.left_basis()) <= 1e-8);
            prop_assert!(orthogonality_loss(gkb.right_basis()) <= 1e-8);
        }
    }

    #[test]
    fn gmres_terminates_in_n_steps(seed in any::<u64>(), side in 2usize..=4) {
        let big = side * side;
        let (op, b) = random_dense(seed, big, side);
        let r = gmres(&op, &b, &SolveOptions::new(big)).unwrap();
        prop_assert!(true_residual(&op, &b, &r.final_x) <= 1e-10 * norm(&b));
    }

    #[test]
    fn projected_residuals_are_true_residuals(seed in any::<u64>(), side in 3usize..=5) {
        let big = side * side;
        let (op, b) = random_dense(seed, big, side);
        let opts = SolveOptions::new(big / 2).cross_checked();
        for r in [gmres(&op, &b, &opts).unwrap(), lsqr(&op, &b, &opts).unwrap()] {
            prop_assert!(r.max_residual_mismatch().unwrap() <= 1e-8 * norm(&b).max(1.0));
        }
    }

    #[test]
    fn low_rank_solutions_respect_the_rank(seed in any::<u64>(), kappa in 1usize..4) {
        let side = 5;
        let (op, b) = random_dense(seed, side * side, side);
        let opts = SolveOptions::new(12);
        for r in [
            lr_fgmres(&op, &b, Truncation::uniform(kappa), &opts).unwrap(),
            lr_flsqr(&op, &b, Truncation::uniform(kappa), &opts).unwrap(),
        ] {
            let s = singular_values(&r.final_x, side).unwrap();
            prop_assert!(s[kappa] <= 1e-10 * s[0]);
        }
    }

    #[test]
    fn irn_first_cycle_is_the_plain_solver(seed in any::<u64>()) {
        let side = 4;
        let (op, b) = random_dense(seed, side * side, side);
        let k = 8;
        let cfg = NnrConfig { max_outer: 1, max_inner: k, max_iter: k, tau_sigma: 0.0, ..NnrConfig::default() };
        let mon = Monitor { record_iterates: true, ..Monitor::default() };
        let opts = SolveOptions::new(k).recording_iterates();
        let pairs: [(SolveReport, SolveReport); 2] = [
            (irn_nnrp(&op, &b, &cfg, IrnInner::Arnoldi, mon).unwrap(), gmres(&op, &b, &opts).unwrap()),
            (irn_nnrp(&op, &b, &cfg, IrnInner::Gkb, mon).unwrap(), lsqr(&op, &b, &opts).unwrap()),
        ];
        for (a, g) in &pairs {
            prop_assert_eq!(a.iterates.len(), g.iterates.len());
            for (x, y) in a.iterates.iter().zip(&g.iterates) {
                let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
                prop_assert!(norm(&d) <= 1e-8 * norm(y));
            }
        }
    }

    #[test]
    fn svt_singular_values_are_shrunk(seed in any::<u64>(), tau_frac in 0.05f64..0.8) {
        let n = 8;
        let p = inpainting_problem(&InpaintingParams {
            image: ImageSource::HouseLike,
            n,
            rank_cap: 3,
            mask: MaskSpec::missing(0.3),
            blur: BlurSpec::None,
            noise_level: 1e-2,
            seed,
        }).unwrap();
        let op = p.op.as_ref();
        let tau = tau_frac * singular_values(&op.apply_adjoint(&p.b), n).unwrap()[0];
        let mut st = SvtState::new(op, &p.b, tau).unwrap();
        for _ in 0..10 {
            let bound = singular_values(&op.apply_adjoint(st.dual()), n).unwrap();
            let (x, _) = st.step(1.0).unwrap();
            let got = singular_values(&x, n).unwrap();
            for (g, s) in got.iter().zip(&bound) {
                prop_assert!(*g <= (s - tau).max(0.0) + 1e-10);
            }
        }
    }
}

#[test]
fn weighted_objective_decreases_along_gkb() {
    let side = 5;
    let big = side * side;
    let (op, b) = random_dense(11, big, side);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let xk = DMatrix::from_fn(side, side, |_, _| rng.random_range(-1.0..1.0));
    let rw = Reweighter::from_iterate(&xk, 0.8, 1e-2, PowerMode::Gkb).unwrap();
    let lambda = 0.05;
    // transformed operator A Sᵀ W⁻¹, assembled explicitly
    let cols_t: Vec<Vec<f64>> = (0..big)
        .map(|j| {
            let mut e = vec![0.0; big];
            e[j] = 1.0;
            op.apply(&rw.from_singular_domain(&e, -1).unwrap())
        })
        .collect();
    let t_op = DenseOperator::new(cols(&cols_t)).unwrap();
    let opts = SolveOptions::new(big)
        .with_lambda_rule(LambdaRule::Fixed { value: lambda })
        .recording_iterates();
    let r = lsqr(&t_op, &b, &opts).unwrap();
    let objective = |xh: &[f64]| true_residual(&t_op, &b, xh).powi(2) + lambda * norm(xh).powi(2);
    let values: Vec<f64> = r.iterates.iter().map(|x| objective(x)).collect();
    assert!(values.len() > 3);
    for w in values.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{values:?}");
    }
    // the last value is the global minimum of the weighted problem
    let mut lhs = t_op.matrix().transpose() * t_op.matrix();
    lhs += DMatrix::identity(big, big) * lambda;
    let xh = lhs.cholesky().unwrap().solve(&(t_op.matrix().transpose() * DVector::from_column_slice(&b)));
    assert!((values.last().unwrap() - objective(xh.as_slice())).abs() <= 1e-10 * objective(xh.as_slice()));
}

#[test]
fn outer_cycles_restart_from_zero() {
    let p = star_problem(16, 1e-3, 1.5, 2).unwrap();
    let (op, b) = (p.op.as_ref(), &p.b);
    let cfg = NnrConfig {
        max_outer: 3,
        max_inner: 6,
        max_iter: 18,
        tau_sigma: 0.0,
        ..NnrConfig::default()
    };
    let mon = Monitor {
        x_exact: Some(&p.x_exact),
        record_iterates: true,
        ..Monitor::default()
    };
    let r = irn_nnrp(op, b, &cfg, IrnInner::Gkb, mon).unwrap();
    let atb = op.apply_adjoint(b);
    for k in 1..3 {
        let first = r.iterations.iter().position(|it| it.outer == k).unwrap();
        let prev = unvec(&r.iterates[first - 1], 16).unwrap();
        // one step from zero lies along Sᵀ W⁻² S Aᵀ b of the new reweighting
        let rw = Reweighter::from_iterate(&prev, cfg.p, cfg.gamma.at(k), PowerMode::Gkb).unwrap();
        let dir = rw.sandwich(&atb, -2).unwrap();
        let x = &r.iterates[first];
        let cos = x.iter().zip(&dir).map(|(a, c)| a * c).sum::<f64>() / (norm(x) * norm(&dir));
        assert!((cos - 1.0).abs() <= 1e-10, "cycle {k}: cos {cos}");
        assert!(r.iterations[first].rel_error.unwrap() > r.iterations[first - 1].rel_error.unwrap());
    }
}

#[test]
fn svt_runs_through_the_driver() {
    let p = star_problem(16, 1e-3, 1.0, 5).unwrap();
    let tau = 0.05 * singular_values(&p.op.apply_adjoint(&p.b), 16).unwrap()[0];
    let r = svt(p.op.as_ref(), &p.b, tau, &StepSize::Constant(1.0), &SolveOptions::new(30).with_exact(&p.x_exact)).unwrap();
    assert_eq!(r.iterations.len(), 30);
    assert!(r.min_rel_error().unwrap() < 1.0);
}
