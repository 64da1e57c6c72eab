//! Dense and sparse linear algebra kernels.
//!
//! Everything here is deterministic: no pivoting on values except the column
//! pivoting of the QR factorization, which depends only on the input matrix.

mod qr;
mod skyline;

pub use qr::{DenseCholesky, PivotedQr, QrError};
pub use skyline::{SkylineCholesky, SkylineError, SkylineMatrix, SkylinePattern};
