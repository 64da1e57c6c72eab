//! Spatial fields expanded on the orthonormal chaos basis.

use crate::fem::SparseOperator;
use crate::real::Real;
use crate::sparse_poly::{design_matrix_of, MultiIndex, MultiIndexSet, PceApprox};

/// A nodal field with one coefficient vector per multi-index:
/// `U(ξ) = Σ_α u_α ψ_α(ξ)`.
#[derive(Debug, Clone)]
pub struct PceField<T> {
    pub set: MultiIndexSet,
    /// One nodal vector per index in `set`, all the same length.
    pub coeffs: Vec<Vec<T>>,
    /// Nodal vector length.
    pub n_nodes: usize,
}

impl<T: Real> PceField<T> {
    /// The zero field (empty index set).
    pub fn zero(m: usize, n_nodes: usize) -> Self {
        Self { set: MultiIndexSet::empty(m), coeffs: Vec::new(), n_nodes }
    }

    pub fn m(&self) -> usize {
        self.set.m()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient vector of `alpha`, if present.
    pub fn coeff(&self, alpha: &MultiIndex) -> Option<&[T]> {
        self.set.position(alpha).map(|k| self.coeffs[k].as_slice())
    }

    /// Build from an approximation whose outputs are nodal values.
    pub fn from_approx(approx: &PceApprox<T>) -> Self {
        let n_nodes = approx.n_outputs();
        let coeffs = (0..approx.set.len())
            .map(|k| approx.coefficients.row(k).to_vec())
            .collect();
        Self { set: approx.set.clone(), coeffs, n_nodes }
    }

    /// `ρ a + (1-ρ) b` over the union index set, dropping exactly zero
    /// columns.
    pub fn combine(a: &PceField<T>, rho: T, b: &PceField<T>) -> Self {
        Self::linear(a, rho, b, T::one() - rho)
    }

    /// `c_a a + c_b b` over the union index set, dropping exactly zero
    /// columns.
    pub fn linear(a: &PceField<T>, c_a: T, b: &PceField<T>, c_b: T) -> Self {
        assert_eq!(a.n_nodes, b.n_nodes);
        let union = a.set.union(&b.set);
        let mut coeffs = Vec::with_capacity(union.len());
        let mut kept = Vec::with_capacity(union.len());
        for alpha in union.iter() {
            let mut v = vec![T::zero(); a.n_nodes];
            if let Some(ca) = a.coeff(alpha) {
                for (x, y) in v.iter_mut().zip(ca) {
                    *x = *x + c_a * *y;
                }
            }
            if let Some(cb) = b.coeff(alpha) {
                for (x, y) in v.iter_mut().zip(cb) {
                    *x = *x + c_b * *y;
                }
            }
            if v.iter().any(|x| *x != T::zero()) {
                kept.push(alpha.clone());
                coeffs.push(v);
            }
        }
        let set = MultiIndexSet::from_indices(a.set.m(), kept).unwrap();
        Self { set, coeffs, n_nodes: a.n_nodes }
    }

    /// `a - b`.
    pub fn sub(a: &PceField<T>, b: &PceField<T>) -> Self {
        Self::linear(a, T::one(), b, -T::one())
    }

    /// `Σ_α a_αᵀ G b_α` over the union index set: the `ℓ²_μ ⊗ (G-inner
    /// product)` pairing, exact by orthonormality.
    pub fn gram_inner(a: &PceField<T>, b: &PceField<T>, gram: &SparseOperator<T>) -> T {
        let mut acc = T::zero();
        for (k, alpha) in a.set.iter().enumerate() {
            if let Some(cb) = b.coeff(alpha) {
                acc = acc + gram.bilinear(&a.coeffs[k], cb);
            }
        }
        acc
    }

    pub fn gram_norm_sq(&self, gram: &SparseOperator<T>) -> T {
        self.coeffs.iter().map(|c| gram.bilinear(c, c)).sum()
    }

    /// Evaluate the field at a sample.
    pub fn evaluate(&self, xi: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_nodes];
        if self.coeffs.is_empty() {
            return out;
        }
        let basis = design_matrix_of(&[xi.to_vec()], self.set.indices(), self.set.m());
        for (k, c) in self.coeffs.iter().enumerate() {
            let b = basis[[0, k]];
            if b != T::zero() {
                for (o, v) in out.iter_mut().zip(c) {
                    *o = *o + b * *v;
                }
            }
        }
        out
    }

    /// Restrict each coefficient vector to a subset of nodes.
    pub fn restrict_nodes(&self, nodes: &[usize]) -> ndarray::Array2<T> {
        let mut out = ndarray::Array2::<T>::zeros((self.set.len(), nodes.len()));
        for (k, c) in self.coeffs.iter().enumerate() {
            for (j, &n) in nodes.iter().enumerate() {
                out[[k, j]] = c[n];
            }
        }
        out
    }
}
