use super::arnoldi::{orthogonalize, StepOutcome, BREAKDOWN_TOL};
use crate::error::{check_len, Error, Result};
use crate::linalg::{norm2, scale};
use nalgebra::DMatrix;

/// Partial (flexible) Golub-Kahan factorization
///
/// ```text
/// A Z_k = U_{k+1} M_k,    Aᵀ U_{k+1} = V_{k+1} T_{k+1}
/// ```
///
/// with `U`, `V` orthonormal, `M_k` upper Hessenberg and `T_{k+1}` upper
/// triangular. The next right vector `v_{k+1}` is computed eagerly so both
/// identities hold after every step. Without a preconditioner `Z_k = V_k`
/// and `M_k` reduces (up to rounding) to the lower bidiagonal matrix of
/// standard Golub-Kahan bidiagonalization.
#[derive(Debug, Clone)]
pub struct GkbState {
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    /// Column `j` holds `m_{1..=j+2, j+1}`.
    m: Vec<Vec<f64>>,
    /// Column `j` holds `t_{1..=j+1, j+1}`.
    t: Vec<Vec<f64>>,
    beta: f64,
    norm_sq: f64,
    breakdown: bool,
}

impl GkbState {
    /// `u₁ = b/‖b‖₂`, `v₁ = Aᵀu₁/‖Aᵀu₁‖₂`.
    pub fn new(b: &[f64], adjoint: &dyn Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let beta = norm2(b);
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::ZeroVector("Golub-Kahan starting vector"));
        }
        let mut u1 = b.to_vec();
        scale(1.0 / beta, &mut u1);
        let mut w = adjoint(&u1);
        let t11 = norm2(&w);
        if t11 == 0.0 {
            return Err(Error::ZeroVector("Aᵀb"));
        }
        scale(1.0 / t11, &mut w);
        Ok(Self {
            u: vec![u1],
            v: vec![w],
            z: Vec::new(),
            m: Vec::new(),
            t: vec![vec![t11]],
            beta,
            norm_sq: t11 * t11,
            breakdown: false,
        })
    }

    pub fn step(
        &mut self,
        matvec: &dyn Fn(&[f64]) -> Vec<f64>,
        adjoint: &dyn Fn(&[f64]) -> Vec<f64>,
        precondition: Option<&mut dyn FnMut(&[f64]) -> Result<Vec<f64>>>,
    ) -> Result<StepOutcome> {
        if self.breakdown {
            return Ok(StepOutcome::Breakdown);
        }
        let (rows, cols) = (self.u[0].len(), self.v[0].len());
        let vi = self.v.last().expect("basis is never empty");
        let zi = match precondition {
            Some(p) => {
                let z = p(vi)?;
                check_len("preconditioner output", cols, z.len())?;
                z
            }
            None => vi.clone(),
        };
        let mut w = matvec(&zi);
        check_len("Golub-Kahan matvec", rows, w.len())?;
        let mut mcol = orthogonalize(&mut w, &self.u);
        let m_next = norm2(&w);
        mcol.push(m_next);
        self.norm_sq += mcol.iter().map(|c| c * c).sum::<f64>();
        self.z.push(zi);
        self.m.push(mcol);
        if m_next <= BREAKDOWN_TOL * self.norm_sq.sqrt() {
            self.breakdown = true;
            return Ok(StepOutcome::Breakdown);
        }
        scale(1.0 / m_next, &mut w);
        self.u.push(w);

        let mut w = adjoint(self.u.last().expect("just pushed"));
        check_len("Golub-Kahan adjoint", cols, w.len())?;
        let mut tcol = orthogonalize(&mut w, &self.v);
        let t_next = norm2(&w);
        tcol.push(t_next);
        self.norm_sq += tcol.iter().map(|c| c * c).sum::<f64>();
        self.t.push(tcol);
        if t_next <= BREAKDOWN_TOL * self.norm_sq.sqrt() {
            // U_{k+1} is complete but no new right vector exists; the solve
            // for this step is still valid.
            self.breakdown = true;
            self.v.push(vec![0.0; cols]);
            return Ok(StepOutcome::Expanded);
        }
        scale(1.0 / t_next, &mut w);
        self.v.push(w);
        Ok(StepOutcome::Expanded)
    }

    pub fn steps(&self) -> usize {
        self.m.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_broken_down(&self) -> bool {
        self.breakdown
    }

    pub fn left_basis(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn right_basis(&self) -> &[Vec<f64>] {
        &self.v
    }

    pub fn solution_basis(&self) -> &[Vec<f64>] {
        &self.z
    }

    /// `M_k`, `(k+1)×k` upper Hessenberg.
    pub fn projected(&self) -> DMatrix<f64> {
        let k = self.m.len();
        let mut out = DMatrix::zeros(k + 1, k);
        for (j, col) in self.m.iter().enumerate() {
            for (i, &val) in col.iter().enumerate() {
                out[(i, j)] = val;
            }
        }
        out
    }

    /// `T_{k+1}`, upper triangular.
    pub fn triangular(&self) -> DMatrix<f64> {
        let k = self.t.len();
        let mut out = DMatrix::zeros(k, k);
        for (j, col) in self.t.iter().enumerate() {
            for (i, &val) in col.iter().enumerate() {
                out[(i, j)] = val;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_loss;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn columns(cols: &[Vec<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i])
    }

    #[test]
    fn first_normalization() {
        // orthogonal rows
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        let at = move |y: &[f64]| (a.transpose() * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec();
        let st = GkbState::new(&[3.0, 4.0], &at).unwrap();
        let expect = norm2(&at(&[0.6, 0.8]));
        assert_eq!(st.triangular()[(0, 0)], expect);
    }

    #[test]
    fn rectangular_factorizations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = DMatrix::from_fn(20, 12, |_, _| rng.random_range(-1.0..1.0));
        let b: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mv = |x: &[f64]| (&a * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec();
        let at = |y: &[f64]| (a.transpose() * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec();
        let mut st = GkbState::new(&b, &at).unwrap();
        for _ in 0..6 {
            st.step(&mv, &at, None).unwrap();
        }
        let (u, v, z) = (columns(st.left_basis()), columns(st.right_basis()), columns(st.solution_basis()));
        let (m, t) = (st.projected(), st.triangular());
        assert!((&a * z - &u * &m).norm() <= 1e-10 * m.norm());
        assert!((a.transpose() * &u - &v * &t).norm() <= 1e-10 * t.norm());
        assert!(orthogonality_loss(st.left_basis()) <= 1e-10);
        assert!(orthogonality_loss(st.right_basis()) <= 1e-10);
        // unpreconditioned: M is lower bidiagonal
        for j in 0..m.ncols() {
            for i in 0..j {
                assert!(m[(i, j)].abs() <= 1e-10 * m.norm(), "m[{i},{j}] = {}", m[(i, j)]);
            }
        }
    }
}
