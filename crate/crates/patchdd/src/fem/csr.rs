//! Compressed sparse row operators with a shared, immutable pattern.

use crate::linalg::{SkylineMatrix, SkylinePattern};
use crate::real::Real;
use ndarray::Array2;
use std::sync::Arc;

/// Sparsity pattern with deterministic (sorted) column order per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrPattern {
    /// Node-adjacency pattern of a triangulation (square, symmetric).
    pub fn from_triangles(n_nodes: usize, triangles: &[[usize; 3]]) -> Arc<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for t in triangles {
            for &i in t {
                for &j in t {
                    adj[i].push(j);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n_nodes + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            col_idx.extend_from_slice(list);
            row_ptr.push(col_idx.len());
        }
        Arc::new(Self { n_rows: n_nodes, n_cols: n_nodes, row_ptr, col_idx })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let base = self.row_ptr[i];
        let row = self.row(i);
        match row.binary_search(&j) {
            Ok(k) => base + k,
            Err(_) => panic!("entry ({i}, {j}) outside pattern"),
        }
    }
}

/// Sparse matrix on a shared pattern; entry ordering is deterministic.
#[derive(Debug, Clone)]
pub struct SparseOperator<T> {
    pattern: Arc<CsrPattern>,
    values: Vec<T>,
}

impl<T: Real> SparseOperator<T> {
    pub fn zeros(pattern: Arc<CsrPattern>) -> Self {
        let len = pattern.col_idx.len();
        Self { pattern, values: vec![T::zero(); len] }
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn n_rows(&self) -> usize {
        self.pattern.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.pattern.n_cols
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let s = self.pattern.slot(i, j);
        self.values[s] = self.values[s] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let base = self.pattern.row_ptr[i];
        match self.pattern.row(i).binary_search(&j) {
            Ok(k) => self.values[base + k],
            Err(_) => T::zero(),
        }
    }

    pub fn clear(&mut self) {
        for v in &mut self.values {
            *v = T::zero();
        }
    }

    /// `self += alpha * other`; both operators must share the same pattern.
    pub fn add_scaled(&mut self, other: &SparseOperator<T>, alpha: T) {
        assert!(
            Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern,
            "pattern mismatch in add_scaled"
        );
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + alpha * *b;
        }
    }

    pub fn scaled(&self, alpha: T) -> SparseOperator<T> {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = *v * alpha;
        }
        out
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols());
        assert_eq!(y.len(), self.n_rows());
        for i in 0..self.n_rows() {
            let lo = self.pattern.row_ptr[i];
            let hi = self.pattern.row_ptr[i + 1];
            let mut acc = T::zero();
            for k in lo..hi {
                acc = acc + self.values[k] * x[self.pattern.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows()];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A y` for a square operator.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(&a, &b)| a * b).sum()
    }

    /// Largest absolute asymmetry `max |A - Aᵀ|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n_rows() {
            let lo = self.pattern.row_ptr[i];
            let hi = self.pattern.row_ptr[i + 1];
            for k in lo..hi {
                let j = self.pattern.col_idx[k];
                if j > i {
                    let d = (self.values[k] - self.get(j, i)).abs();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Extract the square submatrix on `keep` (old index -> position in `keep`).
    pub fn restrict(&self, keep: &[usize], old_to_new: &[Option<usize>]) -> SparseOperator<T> {
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old_i in keep {
            let lo = self.pattern.row_ptr[old_i];
            let hi = self.pattern.row_ptr[old_i + 1];
            for k in lo..hi {
                if let Some(new_j) = old_to_new[self.pattern.col_idx[k]] {
                    col_idx.push(new_j);
                    values.push(self.values[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let pattern = Arc::new(CsrPattern {
            n_rows: keep.len(),
            n_cols: keep.len(),
            row_ptr,
            col_idx,
        });
        SparseOperator { pattern, values }
    }

    /// Skyline profile of the lower triangle, for Cholesky factorization.
    pub fn skyline_pattern(&self) -> Arc<SkylinePattern> {
        let edges = (0..self.n_rows()).flat_map(|i| {
            self.pattern.row(i).iter().filter(move |&&j| j < i).map(move |&j| (i, j))
        });
        Arc::new(SkylinePattern::from_edges(self.n_rows(), edges))
    }

    /// Copy values into a skyline matrix sharing this operator's profile.
    pub fn fill_skyline(&self, target: &mut SkylineMatrix<T>) {
        target.clear();
        for i in 0..self.n_rows() {
            let lo = self.pattern.row_ptr[i];
            let hi = self.pattern.row_ptr[i + 1];
            for k in lo..hi {
                let j = self.pattern.col_idx[k];
                if j <= i {
                    target.add(i, j, self.values[k]).expect("CSR entry outside skyline profile");
                }
            }
        }
    }

    pub fn to_dense(&self) -> Array2<T> {
        let mut d = Array2::<T>::zeros((self.n_rows(), self.n_cols()));
        for i in 0..self.n_rows() {
            let lo = self.pattern.row_ptr[i];
            let hi = self.pattern.row_ptr[i + 1];
            for k in lo..hi {
                d[[i, self.pattern.col_idx[k]]] = self.values[k];
            }
        }
        d
    }
}
