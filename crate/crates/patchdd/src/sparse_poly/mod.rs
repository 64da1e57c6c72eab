//! Sparse polynomial approximation on monotone multi-index sets.
//!
//! Built from four pieces: multi-index sets with margins and bulk selection,
//! the orthonormal Legendre tensor basis on `(0,1)^m`, least squares with the
//! fast leave-one-out estimator, and the adaptive solver combining random
//! sampling with working-set expansion.

mod adaptive;
mod legendre;
mod multi_index;
mod pce;
mod regression;
mod sample_log;

pub use adaptive::{adaptive_fit, adaptive_fit_multi, AdaptiveOutcome, AdaptiveParams, TargetSpec};
pub use legendre::{design_matrix, design_matrix_of, eval_basis, eval_univariate};
pub use multi_index::{monotone_envelope, select_bulk, MultiIndex, MultiIndexSet};
pub use pce::PceApprox;
pub use regression::{loo_errors, ls_fit, LooErrors, LsFit};
pub use sample_log::{GrowthRow, SampleLog};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparsePolyError {
    #[error("multi-index set is not monotone")]
    NotMonotone,
    #[error("multi-index set is empty")]
    EmptySet,
    #[error("duplicate multi-index in set")]
    DuplicateIndex,
    #[error("dimension mismatch: index has {got} components, set has {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("least-squares fit is unstable: {0}")]
    Unstable(String),
}
