//! Structured triangulations, patch layouts and interface maps.

mod interface;
mod layout;
mod structured;
mod vtk;

pub use interface::{build_interface_map, InterfaceMap, PatchInterface};
pub use layout::{partition_global, ElementRegion, PatchLayout};
pub use structured::{build_rect_mesh, NodeTag, Rect, StructuredTriMesh};
pub use vtk::{submesh, write_vtk, write_vtk_cells};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("box side {side} = {len} is not an integer multiple of element size {size}")]
    NotDivisible { side: &'static str, len: f64, size: f64 },
    #[error("element size must be positive, got {0}")]
    NonPositiveSize(f64),
    #[error("patch {patch} boundary coordinate {coord} does not lie on a mesh line")]
    OffMeshLine { patch: usize, coord: f64 },
    #[error("patch {0} is not strictly inside the domain")]
    PatchTouchesBoundary(usize),
    #[error("patches {0} and {1} overlap")]
    PatchesOverlap(usize, usize),
    #[error("inclusion box of patch {0} is not strictly inside the patch")]
    InclusionNotInside(usize),
    #[error("patch {patch}: fine size {fine} does not divide coarse size {coarse} (meshes not nested)")]
    NotNested { patch: usize, fine: f64, coarse: f64 },
    #[error("patch count mismatch: layout has {layout} patches, {given} meshes given")]
    PatchCountMismatch { layout: usize, given: usize },
}
