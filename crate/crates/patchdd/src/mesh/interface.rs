//! Interface node maps and the coarse-to-fine trace prolongation.

use super::structured::{Rect, StructuredTriMesh};
use super::{MeshError, PatchLayout};
use crate::real::{real, Real};
use ndarray::Array2;

/// Interface data for one patch: node lists along `Γ_q` ordered by arc length
/// counterclockwise from the lower-left corner, and the prolongation taking
/// coarse interface nodal values to fine interface nodal values.
#[derive(Debug, Clone)]
pub struct PatchInterface<T> {
    /// Global-mesh node ids on `Γ_q`.
    pub coarse_nodes: Vec<usize>,
    /// Patch-mesh node ids on `Γ_q`.
    pub fine_nodes: Vec<usize>,
    /// `n_fine × n_coarse` interpolation matrix; rows sum to one.
    pub prolong: Array2<T>,
    /// Global-mesh node ids strictly interior to `Λ̃_q`.
    pub interior_global: Vec<usize>,
    /// Uniform length of the fine interface segments.
    pub segment_len: T,
}

impl<T: Real> PatchInterface<T> {
    /// Apply the prolongation to coarse interface values.
    pub fn prolongate(&self, coarse: &[T]) -> Vec<T> {
        assert_eq!(coarse.len(), self.coarse_nodes.len());
        let nf = self.fine_nodes.len();
        let mut out = vec![T::zero(); nf];
        for f in 0..nf {
            let mut s = T::zero();
            for c in 0..coarse.len() {
                s = s + self.prolong[[f, c]] * coarse[c];
            }
            out[f] = s;
        }
        out
    }
}

/// Interface maps for all patches of a layout.
#[derive(Debug, Clone)]
pub struct InterfaceMap<T> {
    pub patches: Vec<PatchInterface<T>>,
}

/// Walk the boundary ring of `rect` on a structured mesh, counterclockwise
/// from the lower-left corner, returning node ids in arc-length order.
fn boundary_ring<T: Real>(
    mesh: &StructuredTriMesh<T>,
    rect: &Rect<T>,
    patch: usize,
) -> Result<Vec<usize>, MeshError> {
    let s = mesh.size();
    let tol = real::<T>(1e-9);
    let origin = mesh.rect();
    let to_index = |v: T, o: T, coord: T| -> Result<usize, MeshError> {
        let t = (v - o) / s;
        let r = t.round();
        if (t - r).abs() * s > tol {
            return Err(MeshError::OffMeshLine { patch, coord: coord.to_f64_lossy() });
        }
        Ok(r.to_f64_lossy() as usize)
    };
    let i0 = to_index(rect.x0, origin.x0, rect.x0)?;
    let i1 = to_index(rect.x1, origin.x0, rect.x1)?;
    let j0 = to_index(rect.y0, origin.y0, rect.y0)?;
    let j1 = to_index(rect.y1, origin.y0, rect.y1)?;
    let mut ring = Vec::with_capacity(2 * ((i1 - i0) + (j1 - j0)));
    for i in i0..i1 {
        ring.push(mesh.node_id(i, j0));
    }
    for j in j0..j1 {
        ring.push(mesh.node_id(i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        ring.push(mesh.node_id(i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        ring.push(mesh.node_id(i0, j));
    }
    Ok(ring)
}

/// Build interface node maps and prolongations for every patch.
///
/// Patch meshes must be nested refinements of the global mesh restricted to
/// `Λ_q`: the fine size must divide the coarse size.
pub fn build_interface_map<T: Real>(
    global: &StructuredTriMesh<T>,
    patch_meshes: &[StructuredTriMesh<T>],
    layout: &PatchLayout<T>,
) -> Result<InterfaceMap<T>, MeshError> {
    if patch_meshes.len() != layout.n_patches() {
        return Err(MeshError::PatchCountMismatch {
            layout: layout.n_patches(),
            given: patch_meshes.len(),
        });
    }
    let mut patches = Vec::with_capacity(layout.n_patches());
    for (q, (fine_mesh, rect)) in patch_meshes.iter().zip(&layout.patch_boxes).enumerate() {
        let coarse_h = global.size();
        let fine_h = fine_mesh.size();
        let ratio_t = coarse_h / fine_h;
        let ratio_round = ratio_t.round();
        if (ratio_t - ratio_round).abs() > real::<T>(1e-12) * ratio_t
            || ratio_round < T::one()
        {
            return Err(MeshError::NotNested {
                patch: q,
                fine: fine_h.to_f64_lossy(),
                coarse: coarse_h.to_f64_lossy(),
            });
        }
        let ratio = ratio_round.to_f64_lossy() as usize;
        let coarse_nodes = boundary_ring(global, rect, q)?;
        let fine_nodes = boundary_ring(fine_mesh, rect, q)?;
        let nc = coarse_nodes.len();
        let nf = fine_nodes.len();
        debug_assert_eq!(nf, nc * ratio);
        let mut prolong = Array2::<T>::zeros((nf, nc));
        for f in 0..nf {
            let k = f / ratio;
            let rem = f % ratio;
            if rem == 0 {
                prolong[[f, k]] = T::one();
            } else {
                let theta = real::<T>(rem as f64 / ratio as f64);
                prolong[[f, k]] = T::one() - theta;
                prolong[[f, (k + 1) % nc]] = theta;
            }
        }
        // geometric consistency: interpolated coarse positions hit fine nodes
        let tol = real::<T>(1e-9);
        for f in 0..nf {
            let pf = fine_mesh.nodes[fine_nodes[f]];
            let mut px = T::zero();
            let mut py = T::zero();
            for c in 0..nc {
                let w = prolong[[f, c]];
                if w != T::zero() {
                    let pc = global.nodes[coarse_nodes[c]];
                    px = px + w * pc[0];
                    py = py + w * pc[1];
                }
            }
            debug_assert!(
                (px - pf[0]).abs() <= tol && (py - pf[1]).abs() <= tol,
                "interface walks disagree at fine node {f} of patch {q}"
            );
        }
        let interior_global = (0..global.n_nodes())
            .filter(|&n| rect.contains_strict(global.nodes[n], real::<T>(1e-9)))
            .collect();
        patches.push(PatchInterface {
            coarse_nodes,
            fine_nodes,
            prolong,
            interior_global,
            segment_len: fine_h,
        });
    }
    Ok(InterfaceMap { patches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured::{build_rect_mesh, NodeTag};

    fn bench_setup() -> (StructuredTriMesh<f64>, Vec<StructuredTriMesh<f64>>, PatchLayout<f64>) {
        let global = build_rect_mesh(Rect::new(0.0, 2.0, 0.0, 16.0), 0.1, NodeTag::Dirichlet).unwrap();
        let mut patch_boxes = Vec::new();
        let mut inclusion_boxes = Vec::new();
        let mut meshes = Vec::new();
        for q in 1..=8 {
            let yc = 2.0 * q as f64 - 1.0;
            let b = Rect::new(0.5, 1.5, yc - 0.5, yc + 0.5);
            patch_boxes.push(b);
            inclusion_boxes.push(Rect::new(0.75, 1.25, yc - 0.25, yc + 0.25));
            meshes.push(build_rect_mesh(b, 0.05, NodeTag::Interface).unwrap());
        }
        let layout = PatchLayout { patch_boxes, inclusion_boxes, weights: vec![1.0; 8] };
        (global, meshes, layout)
    }

    #[test]
    fn benchmark_interface_counts() {
        let (global, meshes, layout) = bench_setup();
        let map = build_interface_map(&global, &meshes, &layout).unwrap();
        for p in &map.patches {
            assert_eq!(p.coarse_nodes.len(), 40);
            assert_eq!(p.fine_nodes.len(), 80);
            // h = H/2: every second row has two 0.5 entries
            for f in 0..80 {
                let row: Vec<f64> = (0..40).map(|c| p.prolong[[f, c]]).collect();
                let nz: Vec<f64> = row.iter().copied().filter(|v| *v != 0.0).collect();
                if f % 2 == 0 {
                    assert_eq!(nz, vec![1.0]);
                } else {
                    assert_eq!(nz, vec![0.5, 0.5]);
                }
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-14);
            }
            // 9x9 strictly interior coarse nodes
            assert_eq!(p.interior_global.len(), 81);
        }
    }

    #[test]
    fn identity_prolongation_when_sizes_match() {
        let global = build_rect_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 0.1, NodeTag::Dirichlet).unwrap();
        let b = Rect::new(0.2, 0.6, 0.3, 0.7);
        let fine = build_rect_mesh(b, 0.1, NodeTag::Interface).unwrap();
        let layout = PatchLayout {
            patch_boxes: vec![b],
            inclusion_boxes: vec![Rect::new(0.3, 0.5, 0.4, 0.6)],
            weights: vec![1.0],
        };
        let map = build_interface_map(&global, &[fine], &layout).unwrap();
        let p = &map.patches[0];
        assert_eq!(p.coarse_nodes.len(), p.fine_nodes.len());
        for f in 0..p.fine_nodes.len() {
            for c in 0..p.coarse_nodes.len() {
                let want = if f == c { 1.0 } else { 0.0 };
                assert_eq!(p.prolong[[f, c]], want);
            }
        }
    }

    #[test]
    fn linear_functions_interpolated_exactly() {
        let (global, meshes, layout) = bench_setup();
        let map = build_interface_map(&global, &meshes, &layout).unwrap();
        for (q, p) in map.patches.iter().enumerate() {
            let lin = |x: f64, y: f64| 0.7 + 1.3 * x - 0.4 * y;
            let coarse: Vec<f64> =
                p.coarse_nodes.iter().map(|&n| lin(global.nodes[n][0], global.nodes[n][1])).collect();
            let fine = p.prolongate(&coarse);
            for (f, &fid) in p.fine_nodes.iter().enumerate() {
                let node = meshes[q].nodes[fid];
                assert!(
                    (fine[f] - lin(node[0], node[1])).abs() < 1e-12,
                    "patch {q} fine node {f}"
                );
            }
        }
    }

    #[test]
    fn non_nested_rejected() {
        let global = build_rect_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 0.1, NodeTag::Dirichlet).unwrap();
        let b = Rect::new(0.2, 0.6, 0.3, 0.7);
        let fine = build_rect_mesh(b, 0.04, NodeTag::Interface).unwrap();
        let layout = PatchLayout {
            patch_boxes: vec![b],
            inclusion_boxes: vec![Rect::new(0.3, 0.5, 0.4, 0.6)],
            weights: vec![1.0],
        };
        assert!(matches!(
            build_interface_map(&global, &[fine], &layout),
            Err(MeshError::NotNested { patch: 0, .. })
        ));
    }
}
