//! Low-rank regularizing Krylov solvers for large-scale ill-posed linear
//! systems `A x = b` whose unknown `x` is a vectorized square image.
//!
//! The crate is organized bottom-up:
//!
//! - [`linops`]: matrix-free forward operators (blur, parallel-beam
//!   tomography, inpainting) and the `vec`/`unvec` plumbing between vectors
//!   and images.
//! - [`lowrank`]: SVD primitives: rank truncation, singular value
//!   shrinkage, the smoothed Schatten-p function and the reweighting
//!   transforms used by the nuclear-norm solvers.
//! - [`krylov`]: (flexible) Arnoldi and Golub-Kahan factorizations, the
//!   projected Tikhonov solve, and the GMRES/LSQR family including the
//!   truncation-based low-rank variants.
//! - [`nnr`]: iteratively reweighted nuclear-norm solvers (nested and
//!   flexible), singular value thresholding, stopping rules and
//!   regularization parameter choice.
//! - [`problems`]: deterministic test problem generators, noise, metrics
//!   and image/metadata I/O.

pub mod error;
pub mod krylov;
pub mod linalg;
pub mod linops;
pub mod lowrank;
pub mod nnr;
pub mod problems;
pub mod report;

pub use error::{Error, Result};
pub use linops::{unvec, vec, LinearOperator, OperatorKind};
pub use report::{IterationRecord, SolveReport, StopReason};
