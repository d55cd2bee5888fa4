//! Krylov factorizations and the GMRES/LSQR solver family.

mod arnoldi;
pub(crate) mod driver;
mod gkb;
mod restarted;
mod solvers;
mod tikhonov;

pub use arnoldi::{ArnoldiState, StepOutcome, BREAKDOWN_TOL};
pub use driver::SolveOptions;
pub use gkb::GkbState;
pub use restarted::{rs_lr_gmres, Restart, GRAM_RIDGE};
pub(crate) use solvers::require_square;
pub use solvers::{gmres, lr_fgmres, lr_flsqr, lsqr, Truncation};
pub use tikhonov::{projected_tikhonov, ProjectedProblem};
