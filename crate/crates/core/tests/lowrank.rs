use lrk_core::lowrank::{shrink, singular_values, smooth_schatten, truncate, PowerMode, Reweighter};
use lrk_core::{unvec, vec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(n: usize, vals: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| vals[(i * n + j) % vals.len()])
}

fn orthogonal(n: usize, vals: &[f64]) -> DMatrix<f64> {
    (matrix(n, vals) + DMatrix::identity(n, n) * 0.1).qr().q()
}

fn entries() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schatten_is_orthogonally_invariant(n in 2usize..7, x in entries(), q in entries(), p_ in entries(),
                                          p in 0.1f64..=1.0, gamma in 1e-4f64..2.0) {
        let x = matrix(n, &x);
        let (q, pm) = (orthogonal(n, &q), orthogonal(n, &p_));
        let a = smooth_schatten(&x, p, gamma).unwrap();
        let b = smooth_schatten(&(&q * &x * &pm), p, gamma).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn schatten_approaches_nuclear_norm(n in 2usize..7, x in entries(), gamma in 1e-8f64..1.0) {
        let x = matrix(n, &x);
        let nuclear: f64 = x.singular_values().iter().sum();
        let s = smooth_schatten(&x, 1.0, gamma).unwrap();
        prop_assert!((s - nuclear).abs() <= n as f64 * gamma.sqrt() + 1e-12);
    }

    #[test]
    fn shrink_is_nonexpansive(n in 2usize..7, x in entries(), y in entries(), tau in 0.0f64..2.0) {
        let (x, y) = (matrix(n, &x), matrix(n, &y) * 0.7);
        let d = (shrink(&x, tau).unwrap() - shrink(&y, tau).unwrap()).norm();
        prop_assert!(d <= (&x - &y).norm() * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn truncation_has_rank_and_is_idempotent(n in 2usize..8, x in entries(), k in 1usize..8) {
        let kappa = k.min(n);
        let t = truncate(&vec(&matrix(n, &x)), n, kappa).unwrap();
        let s = singular_values(&t, n).unwrap();
        if kappa < n {
            prop_assert!(s[kappa] <= 1e-10 * s[0].max(f64::MIN_POSITIVE));
        }
        let tt = truncate(&t, n, kappa).unwrap();
        let gap = t.iter().zip(&tt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-12 * s[0].max(1.0), "gap {gap:e} s {s:?}");
    }

    #[test]
    fn two_inverse_weightings_make_one_squared(n in 2usize..7, x in entries(), v in entries(),
                                               p in 0.1f64..=1.0, gamma in 1e-3f64..1.0) {
        let rw = Reweighter::from_iterate(&matrix(n, &x), p, gamma, PowerMode::Gkb).unwrap();
        let v = &v[..n * n];
        let twice = rw.sandwich(&rw.sandwich(v, -1).unwrap(), -1).unwrap();
        let once = rw.sandwich(v, -2).unwrap();
        for (a, b) in twice.iter().zip(&once) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        // singular-domain form of the same statement
        let inner = rw.to_singular_domain(v, -1).unwrap();
        let chained = rw.from_singular_domain(&inner, -1).unwrap();
        for (a, b) in chained.iter().zip(&once) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn basis_reweighting_raises_singular_values(x in entries(), p in 0.1f64..=1.0) {
        let n = 5;
        let v = vec(&matrix(n, &x));
        let rw = Reweighter::from_basis(&v, n, p, 1e-2, PowerMode::Arnoldi).unwrap();
        let got = unvec(&rw.precondition(&v).unwrap(), n).unwrap();
        let svd = unvec(&v, n).unwrap().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let powered = svd.singular_values.map(|s| s.powf(1.5 - p / 4.0));
        let want = &u * DMatrix::from_diagonal(&powered) * &vt;
        prop_assert!((got - &want).amax() <= 1e-10 * want.amax().max(1.0));
    }
}

#[test]
fn rank_one_basis_vector_stays_parallel() {
    let n = 6;
    let a = DMatrix::from_fn(n, 1, |i, _| (i as f64 + 1.0).sin());
    let b = DMatrix::from_fn(1, n, |_, j| (j as f64 * 0.7).cos() + 0.2);
    let v = vec(&(&a * &b));
    let rw = Reweighter::from_basis(&v, n, 1.0, 1e-2, PowerMode::Arnoldi).unwrap();
    let z = rw.precondition(&v).unwrap();
    let dot: f64 = z.iter().zip(&v).map(|(x, y)| x * y).sum();
    let (nz, nv) = (z.iter().map(|x| x * x).sum::<f64>().sqrt(), v.iter().map(|x| x * x).sum::<f64>().sqrt());
    assert!((dot / (nz * nv) - 1.0).abs() < 1e-12);
}

#[test]
fn higher_power_spreads_the_spectrum() {
    // p = 1 raises singular values to 5/4, so σ̂₁/σ̂₂ ≥ σ₁/σ₂
    let n = 4;
    let x = DMatrix::from_fn(n, n, |i, j| ((i * 3 + j * 5) as f64).sin() + if i == j { 1.0 } else { 0.0 });
    let v = vec(&x);
    let rw = Reweighter::from_basis(&v, n, 1.0, 1e-2, PowerMode::Arnoldi).unwrap();
    let before = singular_values(&v, n).unwrap();
    let after = singular_values(&rw.precondition(&v).unwrap(), n).unwrap();
    assert!(after[0] / after[1] >= before[0] / before[1]);
}
