//! Per-element material coefficient fields.

use crate::mesh::{Rect, StructuredTriMesh};
use crate::real::Real;

/// A scalar material coefficient sampled per element (P0). The indicator
/// variants evaluate at element centroids, which is unambiguous because the
/// inclusion box boundaries lie on mesh lines.
#[derive(Debug, Clone)]
pub struct CoefficientField<T> {
    values: Vec<T>,
}

impl<T: Real> CoefficientField<T> {
    pub fn constant(mesh: &StructuredTriMesh<T>, value: T) -> Self {
        Self { values: vec![value; mesh.n_triangles()] }
    }

    /// Indicator of `support`: one inside, zero outside.
    pub fn indicator(mesh: &StructuredTriMesh<T>, support: &Rect<T>) -> Self {
        let values = (0..mesh.n_triangles())
            .map(|e| {
                if support.contains(mesh.tri_centroid(e), T::zero()) {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        Self { values }
    }

    /// `base + scale * indicator(support)`.
    pub fn affine_indicator(
        mesh: &StructuredTriMesh<T>,
        base: T,
        scale: T,
        support: &Rect<T>,
    ) -> Self {
        let mut f = Self::indicator(mesh, support);
        for v in &mut f.values {
            *v = base + scale * *v;
        }
        f
    }

    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn value(&self, element: usize) -> T {
        self.values[element]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise linear combination with another field on the same mesh.
    pub fn axpy(&mut self, alpha: T, other: &CoefficientField<T>) {
        assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + alpha * *b;
        }
    }
}

/// Load data: a constant volumetric source; Neumann data is unused by the
/// benchmark and omitted.
#[derive(Debug, Clone, Copy)]
pub struct LoadSpec<T> {
    pub f: T,
}
