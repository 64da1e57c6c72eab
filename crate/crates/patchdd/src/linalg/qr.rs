//! Householder QR with column pivoting, plus a small dense Cholesky.
//!
//! The least-squares path only needs the triangular factor: with
//! `Ψ P = Q R`, the minimizer of `‖Ψ V - Y‖` is
//! `V = P R⁻¹ R⁻ᵀ Pᵀ (Ψᵀ Y)`, the hat diagonal is the squared row norm of
//! `Ψ P R⁻¹`, and `tr((ΨᵀΨ)⁻¹) = ‖R⁻¹‖_F²`. Keeping `R⁻¹` explicitly turns
//! everything downstream into matrix products.

use crate::real::{real, Real};
use ndarray::{Array1, Array2, ArrayView2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QrError {
    #[error("least-squares system is underdetermined ({rows} samples for {cols} basis terms)")]
    Underdetermined { rows: usize, cols: usize },
    #[error("design matrix is numerically rank-deficient at pivoted column {col}")]
    RankDeficient { col: usize },
}

/// Column-pivoted QR of a tall matrix, retaining `R⁻¹` and the permutation.
#[derive(Debug, Clone)]
pub struct PivotedQr<T> {
    n_rows: usize,
    n_cols: usize,
    /// `perm[j]` = original column moved to pivoted position `j`.
    perm: Vec<usize>,
    /// Upper triangular factor, dense `k×k`.
    r: Array2<T>,
    /// Explicit inverse of `r`.
    r_inv: Array2<T>,
}

impl<T: Real> PivotedQr<T> {
    /// Factorize `a` (`N×k`, `N ≥ k`). `rank_tol` is relative to the largest
    /// pivot; a trailing pivot below it signals rank deficiency.
    pub fn factorize(a: ArrayView2<T>, rank_tol: T) -> Result<Self, QrError> {
        let (m, k) = (a.nrows(), a.ncols());
        if m < k {
            return Err(QrError::Underdetermined { rows: m, cols: k });
        }
        // column-major working copy
        let mut w: Vec<T> = Vec::with_capacity(m * k);
        for j in 0..k {
            for i in 0..m {
                w.push(a[[i, j]]);
            }
        }
        let col = |j: usize| -> usize { j * m };
        let mut perm: Vec<usize> = (0..k).collect();
        for j in 0..k {
            // pivot: column with largest remaining norm (recomputed, ties -> lowest index)
            let mut best = j;
            let mut best_norm = T::neg_infinity();
            for c in j..k {
                let base = col(c);
                let mut s = T::zero();
                for i in j..m {
                    let v = w[base + i];
                    s = s + v * v;
                }
                if s > best_norm {
                    best_norm = s;
                    best = c;
                }
            }
            if best != j {
                perm.swap(j, best);
                for i in 0..m {
                    w.swap(col(j) + i, col(best) + i);
                }
            }
            // Householder reflector for rows j.. of column j
            let base = col(j);
            let mut norm = T::zero();
            for i in j..m {
                norm = norm + w[base + i] * w[base + i];
            }
            let norm = norm.sqrt();
            if norm == T::zero() {
                return Err(QrError::RankDeficient { col: j });
            }
            let x0 = w[base + j];
            let alpha = if x0 >= T::zero() { -norm } else { norm };
            // v = x - alpha e1, normalized to unit length
            let mut vnorm = T::zero();
            w[base + j] = x0 - alpha;
            for i in j..m {
                vnorm = vnorm + w[base + i] * w[base + i];
            }
            let vnorm = vnorm.sqrt();
            if vnorm > T::zero() {
                let inv = T::one() / vnorm;
                for i in j..m {
                    w[base + i] = w[base + i] * inv;
                }
                // apply H = I - 2 v vᵀ to trailing columns
                for c in j + 1..k {
                    let cb = col(c);
                    let mut dot = T::zero();
                    for i in j..m {
                        dot = dot + w[base + i] * w[cb + i];
                    }
                    let two_dot = real::<T>(2.0) * dot;
                    for i in j..m {
                        w[cb + i] = w[cb + i] - two_dot * w[base + i];
                    }
                }
            }
            // store the diagonal of R in place of v's head; the rest of column j
            // below the diagonal is no longer needed
            w[base + j] = alpha;
            // zero out sub-diagonal bookkeeping so R extraction below is clean
            for i in j + 1..m {
                w[base + i] = T::zero();
            }
        }
        let mut r = Array2::<T>::zeros((k, k));
        for j in 0..k {
            for i in 0..=j {
                r[[i, j]] = w[col(j) + i];
            }
        }
        let rmax = r[[0, 0]].abs();
        for j in 0..k {
            if r[[j, j]].abs() <= rank_tol * rmax {
                return Err(QrError::RankDeficient { col: j });
            }
        }
        let r_inv = invert_upper(&r);
        Ok(Self { n_rows: m, n_cols: k, perm, r, r_inv })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Solve the normal equations given `W = Ψᵀ Y` (`k×n`), returning the
    /// coefficient matrix `V` (`k×n`) in the original column order.
    pub fn solve_normal(&self, w: &Array2<T>) -> Array2<T> {
        let k = self.n_cols;
        assert_eq!(w.nrows(), k);
        let n = w.ncols();
        // Pᵀ W
        let mut wp = Array2::<T>::zeros((k, n));
        for j in 0..k {
            let src = self.perm[j];
            wp.row_mut(j).assign(&w.row(src));
        }
        // (RᵀR)⁻¹ x = R⁻¹ (R⁻ᵀ x)
        let t = self.r_inv.t().dot(&wp);
        let v = self.r_inv.dot(&t);
        // P V
        let mut out = Array2::<T>::zeros((k, n));
        for j in 0..k {
            out.row_mut(self.perm[j]).assign(&v.row(j));
        }
        out
    }

    /// Diagonal of the hat matrix `Ψ (ΨᵀΨ)⁻¹ Ψᵀ` for the factorized design.
    pub fn hat_diagonal(&self, a: ArrayView2<T>) -> Array1<T> {
        let (m, k) = (a.nrows(), a.ncols());
        assert_eq!(m, self.n_rows);
        assert_eq!(k, self.n_cols);
        // G = (Ψ P) R⁻¹, h_l = ‖G_l‖²
        let mut ap = Array2::<T>::zeros((m, k));
        for j in 0..k {
            ap.column_mut(j).assign(&a.column(self.perm[j]));
        }
        let g = ap.dot(&self.r_inv);
        let mut h = Array1::<T>::zeros(m);
        for l in 0..m {
            let mut s = T::zero();
            for j in 0..k {
                s = s + g[[l, j]] * g[[l, j]];
            }
            h[l] = s;
        }
        h
    }

    /// `tr((ΨᵀΨ)⁻¹)`.
    pub fn trace_gram_inverse(&self) -> T {
        let mut s = T::zero();
        for v in self.r_inv.iter() {
            s = s + *v * *v;
        }
        s
    }

    /// Largest over smallest pivot magnitude, a cheap condition estimate.
    pub fn pivot_ratio(&self) -> T {
        let k = self.n_cols;
        self.r[[0, 0]].abs() / self.r[[k - 1, k - 1]].abs()
    }
}

fn invert_upper<T: Real>(r: &Array2<T>) -> Array2<T> {
    let k = r.nrows();
    let mut inv = Array2::<T>::zeros((k, k));
    for j in (0..k).rev() {
        inv[[j, j]] = T::one() / r[[j, j]];
        for i in (0..j).rev() {
            let mut s = T::zero();
            for l in i + 1..=j {
                s = s + r[[i, l]] * inv[[l, j]];
            }
            inv[[i, j]] = -s / r[[i, i]];
        }
    }
    inv
}

/// Dense Cholesky for small SPD matrices (interface mass matrices and the
/// like).
#[derive(Debug, Clone)]
pub struct DenseCholesky<T> {
    l: Array2<T>,
}

impl<T: Real> DenseCholesky<T> {
    pub fn factorize(a: ArrayView2<T>) -> Option<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols());
        let mut l = Array2::<T>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s = s - l[[i, k]] * l[[j, k]];
                }
                if i == j {
                    if s <= T::zero() || !s.is_finite() {
                        return None;
                    }
                    l[[i, i]] = s.sqrt();
                } else {
                    l[[i, j]] = s / l[[j, j]];
                }
            }
        }
        Some(Self { l })
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.l.nrows();
        assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s = s - self.l[[i, k]] * x[k];
            }
            x[i] = s / self.l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - self.l[[k, i]] * x[k];
            }
            x[i] = s / self.l[[i, i]];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn recovers_exact_coefficients() {
        // y = 2 c0 - 3 c1 + 0.5 c2 with more rows than columns
        let m = 12;
        let mut a = Array2::<f64>::zeros((m, 3));
        let mut y = Array2::<f64>::zeros((m, 1));
        for i in 0..m {
            let t = i as f64 / m as f64;
            a[[i, 0]] = 1.0;
            a[[i, 1]] = t;
            a[[i, 2]] = t * t;
            y[[i, 0]] = 2.0 - 3.0 * t + 0.5 * t * t;
        }
        let qr = PivotedQr::factorize(a.view(), 1e-13).unwrap();
        let w = a.t().dot(&y);
        let v = qr.solve_normal(&w);
        assert!((v[[0, 0]] - 2.0).abs() < 1e-12);
        assert!((v[[1, 0]] + 3.0).abs() < 1e-12);
        assert!((v[[2, 0]] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hat_diagonal_matches_definition() {
        let a = array![[1.0, 0.5], [1.0, -0.3], [1.0, 0.9], [1.0, 0.1]];
        let qr = PivotedQr::factorize(a.view(), 1e-13).unwrap();
        let h: ndarray::Array1<f64> = qr.hat_diagonal(a.view());
        // dense reference: H = A (AᵀA)⁻¹ Aᵀ
        let g = a.t().dot(&a);
        let det = g[[0, 0]] * g[[1, 1]] - g[[0, 1]] * g[[1, 0]];
        let ginv = array![[g[[1, 1]] / det, -g[[0, 1]] / det], [-g[[1, 0]] / det, g[[0, 0]] / det]];
        let full = a.dot(&ginv).dot(&a.t());
        for l in 0..4 {
            assert!((h[l] - full[[l, l]]).abs() < 1e-12);
        }
        let tr: f64 = qr.trace_gram_inverse();
        assert!((tr - (ginv[[0, 0]] + ginv[[1, 1]])).abs() < 1e-12);
    }

    #[test]
    fn flags_rank_deficiency() {
        let a = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        assert!(matches!(
            PivotedQr::factorize(a.view(), 1e-12),
            Err(QrError::RankDeficient { .. })
        ));
    }

    #[test]
    fn dense_cholesky_solves() {
        let a = array![[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]];
        let ch = DenseCholesky::factorize(a.view()).unwrap();
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let r0: f64 = 4.0 * x[0] + x[1] - 1.0;
        let r1: f64 = x[0] + 3.0 * x[1] + 0.5 * x[2] - 2.0;
        let r2: f64 = 0.5 * x[1] + 2.0 * x[2] - 3.0;
        assert!(r0.abs() + r1.abs() + r2.abs() < 1e-12);
    }
}
