//! Profile (skyline) Cholesky factorization for sparse SPD systems.
//!
//! The lower triangle of each row is stored contiguously from its first
//! structurally nonzero column to the diagonal. Factorization causes no fill
//! outside the profile, so a pattern built once can be refilled with new
//! values and refactorized cheaply, which is what the per-sample Newton
//! systems need.

use crate::real::Real;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SkylineError {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("entry ({0}, {1}) lies outside the stored profile")]
    OutOfProfile(usize, usize),
}

/// Row profile of a symmetric matrix: for each row, the first column that can
/// hold a nonzero.
#[derive(Debug, Clone)]
pub struct SkylinePattern {
    n: usize,
    first_col: Vec<usize>,
    row_start: Vec<usize>,
}

impl SkylinePattern {
    /// Build a profile from undirected adjacency edges `(i, j)`.
    ///
    /// Diagonal entries are always stored; self-edges are allowed and ignored.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Self {
        let mut first_col: Vec<usize> = (0..n).collect();
        for (i, j) in edges {
            let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
            debug_assert!(hi < n);
            if lo < first_col[hi] {
                first_col[hi] = lo;
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        row_start.push(0);
        for i in 0..n {
            acc += i - first_col[i] + 1;
            row_start.push(acc);
        }
        Self { n, first_col, row_start }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries (profile size).
    pub fn len(&self) -> usize {
        *self.row_start.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        debug_assert!(j <= i);
        if j < self.first_col[i] {
            None
        } else {
            Some(self.row_start[i] + (j - self.first_col[i]))
        }
    }
}

/// Symmetric matrix stored on a skyline profile (lower triangle).
#[derive(Debug, Clone)]
pub struct SkylineMatrix<T> {
    pattern: Arc<SkylinePattern>,
    values: Vec<T>,
}

impl<T: Real> SkylineMatrix<T> {
    pub fn zeros(pattern: Arc<SkylinePattern>) -> Self {
        let len = pattern.len();
        Self { pattern, values: vec![T::zero(); len] }
    }

    pub fn pattern(&self) -> &SkylinePattern {
        &self.pattern
    }

    /// Reset all stored values to zero, keeping the profile.
    pub fn clear(&mut self) {
        for v in &mut self.values {
            *v = T::zero();
        }
    }

    /// Accumulate `v` into entry `(i, j)`; only the lower triangle is stored,
    /// so `(i, j)` and `(j, i)` address the same slot.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) -> Result<(), SkylineError> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        match self.pattern.slot(hi, lo) {
            Some(s) => {
                self.values[s] = self.values[s] + v;
                Ok(())
            }
            None => Err(SkylineError::OutOfProfile(i, j)),
        }
    }

    /// Cholesky factorization `A = L Lᵀ` on the same profile.
    pub fn factorize(&self) -> Result<SkylineCholesky<T>, SkylineError> {
        let p = &self.pattern;
        let n = p.n;
        let mut l = self.values.clone();
        for i in 0..n {
            let fi = p.first_col[i];
            let ri = p.row_start[i];
            for j in fi..i {
                let fj = p.first_col[j];
                let rj = p.row_start[j];
                let lo = fi.max(fj);
                // s = a_ij - sum_k L_ik L_jk over the overlapping profile
                let mut s = l[ri + (j - fi)];
                let ii = ri + (lo - fi);
                let jj = rj + (lo - fj);
                let len = j - lo;
                for k in 0..len {
                    s = s - l[ii + k] * l[jj + k];
                }
                let djj = l[rj + (j - fj)];
                l[ri + (j - fi)] = s / djj;
            }
            let mut d = l[ri + (i - fi)];
            for k in fi..i {
                let lik = l[ri + (k - fi)];
                d = d - lik * lik;
            }
            if d <= T::zero() || !d.is_finite() {
                return Err(SkylineError::NotPositiveDefinite {
                    row: i,
                    pivot: d.to_f64_lossy(),
                });
            }
            l[ri + (i - fi)] = d.sqrt();
        }
        Ok(SkylineCholesky { pattern: self.pattern.clone(), l })
    }

    /// `y = A x` using the symmetric profile storage.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        let p = &self.pattern;
        assert_eq!(x.len(), p.n);
        assert_eq!(y.len(), p.n);
        for v in y.iter_mut() {
            *v = T::zero();
        }
        for i in 0..p.n {
            let fi = p.first_col[i];
            let ri = p.row_start[i];
            let mut acc = T::zero();
            for j in fi..i {
                let a = self.values[ri + (j - fi)];
                acc = acc + a * x[j];
                y[j] = y[j] + a * x[i];
            }
            y[i] = y[i] + acc + self.values[ri + (i - fi)] * x[i];
        }
    }
}

/// Cholesky factor on the skyline profile; solves many right-hand sides.
#[derive(Debug, Clone)]
pub struct SkylineCholesky<T> {
    pattern: Arc<SkylinePattern>,
    l: Vec<T>,
}

impl<T: Real> SkylineCholesky<T> {
    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let p = &self.pattern;
        let n = p.n;
        assert_eq!(x.len(), n);
        // forward substitution L y = b
        for i in 0..n {
            let fi = p.first_col[i];
            let ri = p.row_start[i];
            let mut s = x[i];
            for k in fi..i {
                s = s - self.l[ri + (k - fi)] * x[k];
            }
            x[i] = s / self.l[ri + (i - fi)];
        }
        // backward substitution Lᵀ x = y (column sweep)
        for i in (0..n).rev() {
            let fi = p.first_col[i];
            let ri = p.row_start[i];
            x[i] = x[i] / self.l[ri + (i - fi)];
            let xi = x[i];
            for k in fi..i {
                x[k] = x[k] - self.l[ri + (k - fi)] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
