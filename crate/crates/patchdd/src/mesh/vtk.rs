//! Legacy ASCII VTK export of triangle meshes with point data.

use super::structured::StructuredTriMesh;
use crate::real::Real;
use std::io::{self, Write};

/// Write an unstructured triangle dataset (cell type 5) with optional nodal
/// scalar fields. Values carry 17 significant digits.
pub fn write_vtk_cells<T: Real, W: Write>(
    w: &mut W,
    title: &str,
    nodes: &[[T; 2]],
    triangles: &[[usize; 3]],
    point_data: &[(&str, &[T])],
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", nodes.len())?;
    for p in nodes {
        writeln!(w, "{:.16e} {:.16e} 0.0", p[0].to_f64_lossy(), p[1].to_f64_lossy())?;
    }
    writeln!(w, "CELLS {} {}", triangles.len(), 4 * triangles.len())?;
    for t in triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {}", triangles.len())?;
    for _ in 0..triangles.len() {
        writeln!(w, "5")?;
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {}", nodes.len())?;
        for (name, values) in point_data {
            assert_eq!(values.len(), nodes.len(), "field {name} has wrong length");
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values.iter() {
                writeln!(w, "{:.16e}", v.to_f64_lossy())?;
            }
        }
    }
    Ok(())
}

/// Write a whole structured mesh with nodal fields.
pub fn write_vtk<T: Real, W: Write>(
    w: &mut W,
    title: &str,
    mesh: &StructuredTriMesh<T>,
    point_data: &[(&str, &[T])],
) -> io::Result<()> {
    write_vtk_cells(w, title, &mesh.nodes, &mesh.triangles, point_data)
}

/// Extract the submesh of selected elements: renumbered nodes, triangles,
/// and the map from new node index to original node id.
pub fn submesh<T: Real>(
    mesh: &StructuredTriMesh<T>,
    keep: impl Fn(usize) -> bool,
) -> (Vec<[T; 2]>, Vec<[usize; 3]>, Vec<usize>) {
    let mut new_id = vec![usize::MAX; mesh.n_nodes()];
    let mut nodes = Vec::new();
    let mut node_map = Vec::new();
    let mut triangles = Vec::new();
    for e in 0..mesh.n_triangles() {
        if !keep(e) {
            continue;
        }
        let t = mesh.triangles[e];
        let mut mapped = [0usize; 3];
        for (slot, &n) in mapped.iter_mut().zip(&t) {
            if new_id[n] == usize::MAX {
                new_id[n] = nodes.len();
                nodes.push(mesh.nodes[n]);
                node_map.push(n);
            }
            *slot = new_id[n];
        }
        triangles.push(mapped);
    }
    (nodes, triangles, node_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured::{build_rect_mesh, NodeTag, Rect};

    #[test]
    fn minimal_file_structure() {
        let mesh = build_rect_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 1.0, NodeTag::Dirichlet).unwrap();
        let field: Vec<f64> = (0..4).map(|i| i as f64).collect();
        let mut buf = Vec::new();
        write_vtk(&mut buf, "unit", &mesh, &[("u", &field)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("POINTS 4 double"));
        assert!(text.contains("CELLS 2 8"));
        assert!(text.contains("CELL_TYPES 2"));
        assert!(text.contains("SCALARS u double 1"));
        assert!(text.contains("3.0000000000000000e0"));
    }

    #[test]
    fn submesh_renumbers_consistently() {
        let mesh = build_rect_mesh(Rect::new(0.0, 2.0, 0.0, 1.0), 0.5, NodeTag::Dirichlet).unwrap();
        // keep the left half elements
        let (nodes, tris, map) = submesh(&mesh, |e| mesh.tri_centroid(e)[0] < 1.0);
        assert_eq!(tris.len(), mesh.n_triangles() / 2);
        for (new, &old) in map.iter().enumerate() {
            assert_eq!(nodes[new], mesh.nodes[old]);
        }
        for t in &tris {
            for &n in t {
                assert!(n < nodes.len());
            }
        }
    }
}
