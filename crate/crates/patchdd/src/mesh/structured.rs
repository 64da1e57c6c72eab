//! Regular criss-cross triangulation of a rectangle.

use super::MeshError;
use crate::real::{real, Real};

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Self {
        assert!(x1 > x0 && y1 > y0, "degenerate rectangle");
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn contains(&self, p: [T; 2], tol: T) -> bool {
        p[0] >= self.x0 - tol && p[0] <= self.x1 + tol && p[1] >= self.y0 - tol && p[1] <= self.y1 + tol
    }

    pub fn contains_strict(&self, p: [T; 2], tol: T) -> bool {
        p[0] > self.x0 + tol && p[0] < self.x1 - tol && p[1] > self.y0 + tol && p[1] < self.y1 - tol
    }

    pub fn intersects(&self, other: &Rect<T>) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }
}

/// Per-node classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    /// On a declared Dirichlet boundary segment.
    Dirichlet,
    /// On a patch interface curve.
    Interface,
}

/// Nodes, P1 triangles and node tags of a structured rectangle mesh.
///
/// Node ordering is lexicographic with x fastest; every square cell is split
/// along its lower-left to upper-right diagonal, all triangles
/// counterclockwise. Construction is deterministic.
#[derive(Debug, Clone)]
pub struct StructuredTriMesh<T> {
    pub nodes: Vec<[T; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub node_tags: Vec<NodeTag>,
    rect: Rect<T>,
    size: T,
    nx: usize,
    ny: usize,
}

impl<T: Real> StructuredTriMesh<T> {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn rect(&self) -> Rect<T> {
        self.rect
    }

    /// Cell size of the structured grid.
    pub fn size(&self) -> T {
        self.size
    }

    /// Cell counts along x and y.
    pub fn cells(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn tri_coords(&self, e: usize) -> [[T; 2]; 3] {
        let t = self.triangles[e];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    /// Twice the signed area of triangle `e`.
    pub fn tri_double_area(&self, e: usize) -> T {
        let [a, b, c] = self.tri_coords(e);
        (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    }

    pub fn tri_centroid(&self, e: usize) -> [T; 2] {
        let [a, b, c] = self.tri_coords(e);
        let third = real::<T>(1.0 / 3.0);
        [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third]
    }

    /// Whether `x` lies on a grid line of this mesh, within `tol`.
    pub fn on_grid_x(&self, x: T, tol: T) -> bool {
        on_grid(x, self.rect.x0, self.size, tol)
    }

    pub fn on_grid_y(&self, y: T, tol: T) -> bool {
        on_grid(y, self.rect.y0, self.size, tol)
    }
}

fn on_grid<T: Real>(v: T, origin: T, step: T, tol: T) -> bool {
    let t = (v - origin) / step;
    (t - t.round()).abs() * step <= tol
}

fn cells_along<T: Real>(len: T, size: T, side: &'static str) -> Result<usize, MeshError> {
    let ratio = len / size;
    let n = ratio.round();
    if (ratio - n).abs() > real::<T>(1e-12) * ratio.abs().max(T::one()) {
        return Err(MeshError::NotDivisible {
            side,
            len: len.to_f64_lossy(),
            size: size.to_f64_lossy(),
        });
    }
    Ok(n.to_f64_lossy() as usize)
}

/// Build the criss-cross triangulation of `rect` with square cells of side
/// `size`. Nodes on the rectangle boundary receive `boundary_tag`.
pub fn build_rect_mesh<T: Real>(
    rect: Rect<T>,
    size: T,
    boundary_tag: NodeTag,
) -> Result<StructuredTriMesh<T>, MeshError> {
    if size <= T::zero() {
        return Err(MeshError::NonPositiveSize(size.to_f64_lossy()));
    }
    let nx = cells_along(rect.width(), size, "x")?;
    let ny = cells_along(rect.height(), size, "y")?;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut node_tags = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = rect.x0 + real::<T>(i as f64) * size;
            let y = rect.y0 + real::<T>(j as f64) * size;
            nodes.push([x, y]);
            let on_boundary = i == 0 || i == nx || j == 0 || j == ny;
            node_tags.push(if on_boundary { boundary_tag } else { NodeTag::Interior });
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = id(i, j);
            let b = id(i + 1, j);
            let c = id(i + 1, j + 1);
            let d = id(i, j + 1);
            // split along the a-c diagonal, both triangles counterclockwise
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Ok(StructuredTriMesh { nodes, triangles, node_tags, rect, size, nx, ny })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_global_mesh_counts() {
        let m = build_rect_mesh(Rect::new(0.0, 2.0, 0.0, 16.0), 0.1, NodeTag::Dirichlet).unwrap();
        assert_eq!(m.n_nodes(), 3381);
        assert_eq!(m.n_triangles(), 6400);
        let n_boundary =
            m.node_tags.iter().filter(|t| **t == NodeTag::Dirichlet).count();
        // 2(21 + 161) - 4 boundary nodes
        assert_eq!(n_boundary, 360);
    }

    #[test]
    fn single_cell() {
        let m = build_rect_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 1.0, NodeTag::Dirichlet).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.n_triangles(), 2);
    }

    #[test]
    fn benchmark_patch_mesh_counts() {
        let m = build_rect_mesh(Rect::new(0.5, 1.5, 0.5, 1.5), 0.05, NodeTag::Interface).unwrap();
        assert_eq!(m.n_nodes(), 441);
        assert_eq!(m.n_triangles(), 800);
    }

    #[test]
    fn rejects_non_divisible_box() {
        let err = build_rect_mesh(Rect::new(0.0, 1.05, 0.0, 1.0), 0.1, NodeTag::Dirichlet);
        assert!(matches!(err, Err(MeshError::NotDivisible { .. })));
    }

    #[test]
    fn all_triangles_positive_area() {
        let m = build_rect_mesh(Rect::new(0.0, 2.0, 0.0, 3.0), 0.5, NodeTag::Dirichlet).unwrap();
        for e in 0..m.n_triangles() {
            assert!(m.tri_double_area(e) > 0.0);
        }
        let total: f64 = (0..m.n_triangles()).map(|e| 0.5 * m.tri_double_area(e)).sum();
        assert!((total - 6.0).abs() < 1e-12);
    }

    #[test]
    fn construction_is_reproducible() {
        let a: StructuredTriMesh<f64> =
            build_rect_mesh(Rect::new(0.0, 2.0, 0.0, 16.0), 0.1, NodeTag::Dirichlet).unwrap();
        let b: StructuredTriMesh<f64> =
            build_rect_mesh(Rect::new(0.0, 2.0, 0.0, 16.0), 0.1, NodeTag::Dirichlet).unwrap();
        assert_eq!(a.nodes.len(), b.nodes.len());
        for (p, q) in a.nodes.iter().zip(&b.nodes) {
            assert!(p[0].to_bits() == q[0].to_bits() && p[1].to_bits() == q[1].to_bits());
        }
        assert_eq!(a.triangles, b.triangles);
    }

    #[test]
    fn works_in_f32() {
        let m = build_rect_mesh(Rect::new(0.0f32, 1.0, 0.0, 1.0), 0.25, NodeTag::Dirichlet).unwrap();
        assert_eq!(m.n_nodes(), 25);
        assert_eq!(m.n_triangles(), 32);
    }
}
