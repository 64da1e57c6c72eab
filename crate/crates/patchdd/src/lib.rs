//! Global-local iterative solver for semi-linear elliptic PDEs whose
//! uncertainties and non-linearities are confined to patches.
//!
//! The global problem keeps a deterministic linear operator on a fictitious
//! domain and is solved once per polynomial chaos coefficient; each patch
//! carries a non-linear stochastic problem solved by Newton iteration per
//! sample and approximated by adaptive sparse least squares on a monotone
//! multi-index set. A relaxed fixed-point loop (fixed parameter or Aitken's
//! Delta-Squared) couples the two levels through interface Lagrange
//! multipliers.
//!
//! Module map:
//! - [`mesh`]: structured triangulations, patch layout, interface maps
//! - [`fem`]: P1 assembly of operators, loads, interface coupling, Gram matrices
//! - [`sparse_poly`]: monotone index sets, Legendre basis, least squares with
//!   fast leave-one-out cross-validation, the adaptive sparse solver
//! - [`local_solver`]: per-sample Newton patch solves and their stochastic wrap
//! - [`global_local`]: the outer iteration, relaxation, reference solver and
//!   error indicator
//! - [`postproc`]: moments, sensitivity indices, multiscale field exports
//! - [`problem`] / [`config`]: benchmark construction from a run configuration
//!
//! All numerical kernels are generic over the scalar type through [`Real`];
//! the concrete aliases at the crate root fix `f64` for production use.

pub mod config;
pub mod fem;
pub mod global_local;
pub mod linalg;
pub mod local_solver;
pub mod mesh;
pub mod postproc;
pub mod problem;
pub mod real;
pub mod sparse_poly;

pub use real::{real, Real};

/// Scalar type used by the CLI and the benchmark reproduction.
pub type DefaultReal = f64;

/// Initialize the global rayon pool from `PATCHDD_THREADS` if set.
///
/// Calling this more than once is harmless; only the first call configures
/// the pool.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var("PATCHDD_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
