//! Patch layout and partition of the global mesh into regions.

use super::structured::{Rect, StructuredTriMesh};
use super::MeshError;
use crate::real::{real, Real};

/// Geometry of the patches inside the global domain: each patch box `Λ_q`
/// carries an inclusion box `Λ*_q` supporting the uncertain coefficients and
/// an uncertainty weight `γ_q`.
#[derive(Debug, Clone)]
pub struct PatchLayout<T> {
    pub patch_boxes: Vec<Rect<T>>,
    pub inclusion_boxes: Vec<Rect<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> PatchLayout<T> {
    /// Validate the layout against the global domain: patches pairwise
    /// disjoint, strictly inside, inclusion boxes strictly inside their patch.
    pub fn validate(&self, domain: &Rect<T>) -> Result<(), MeshError> {
        assert_eq!(self.patch_boxes.len(), self.inclusion_boxes.len());
        assert_eq!(self.patch_boxes.len(), self.weights.len());
        let tol = real::<T>(1e-12);
        for (q, b) in self.patch_boxes.iter().enumerate() {
            if !(b.x0 > domain.x0 + tol
                && b.x1 < domain.x1 - tol
                && b.y0 > domain.y0 + tol
                && b.y1 < domain.y1 - tol)
            {
                return Err(MeshError::PatchTouchesBoundary(q));
            }
            let inc = &self.inclusion_boxes[q];
            if !(inc.x0 > b.x0 + tol && inc.x1 < b.x1 - tol && inc.y0 > b.y0 + tol && inc.y1 < b.y1 - tol)
            {
                return Err(MeshError::InclusionNotInside(q));
            }
        }
        for q in 0..self.patch_boxes.len() {
            for p in q + 1..self.patch_boxes.len() {
                if self.patch_boxes[q].intersects(&self.patch_boxes[p]) {
                    return Err(MeshError::PatchesOverlap(q, p));
                }
            }
        }
        Ok(())
    }

    pub fn n_patches(&self) -> usize {
        self.patch_boxes.len()
    }

    /// Random variables: two per patch (diffusion, reaction).
    pub fn n_variables(&self) -> usize {
        2 * self.n_patches()
    }
}

/// Per-element region of the partitioned global mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementRegion {
    Exterior,
    /// Inside fictitious patch `Λ̃_q`.
    Patch(usize),
}

/// Assign every global element to the exterior or to exactly one fictitious
/// patch. Patch box boundaries must lie on mesh lines so no element is cut.
pub fn partition_global<T: Real>(
    mesh: &StructuredTriMesh<T>,
    layout: &PatchLayout<T>,
) -> Result<Vec<ElementRegion>, MeshError> {
    let tol = real::<T>(1e-9);
    for (q, b) in layout.patch_boxes.iter().enumerate() {
        for (coord, on) in [
            (b.x0, mesh.on_grid_x(b.x0, tol)),
            (b.x1, mesh.on_grid_x(b.x1, tol)),
            (b.y0, mesh.on_grid_y(b.y0, tol)),
            (b.y1, mesh.on_grid_y(b.y1, tol)),
        ] {
            if !on {
                return Err(MeshError::OffMeshLine { patch: q, coord: coord.to_f64_lossy() });
            }
        }
    }
    let mut regions = Vec::with_capacity(mesh.n_triangles());
    for e in 0..mesh.n_triangles() {
        let c = mesh.tri_centroid(e);
        let mut region = ElementRegion::Exterior;
        for (q, b) in layout.patch_boxes.iter().enumerate() {
            if b.contains(c, T::zero()) {
                region = ElementRegion::Patch(q);
                break;
            }
        }
        regions.push(region);
    }
    Ok(regions)
}
