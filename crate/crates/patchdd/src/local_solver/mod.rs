//! Non-linear patch solves: Newton per sample, adaptive sparse fit per patch.

mod newton;
mod patch_problem;
mod stochastic;

pub use newton::LocalSample;
pub use patch_problem::PatchProblem;
pub use stochastic::{solve_local_stochastic, BoundaryData, LocalStochastic, WarmCache};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocalSolverError {
    #[error("Newton diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error(transparent)]
    Fem(#[from] crate::fem::FemError),
    #[error(transparent)]
    Factorization(#[from] crate::linalg::SkylineError),
    #[error(transparent)]
    SparsePoly(#[from] crate::sparse_poly::SparsePolyError),
}
