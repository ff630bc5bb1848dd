//! Legacy ASCII VTK (3.0) export of polytopal meshes.

use super::PolytopalMesh;
use crate::error::Result;
use std::io::Write;

/// Write the mesh as a legacy VTK unstructured grid with polygon cells.
///
/// `subdomain` attaches an integer cell array, `cell_scalar` a named float
/// cell array (e.g. a piecewise-constant solution).
pub fn write_vtk(
    mesh: &PolytopalMesh,
    out: &mut dyn Write,
    subdomain: Option<&[usize]>,
    cell_scalar: Option<(&str, &[f64])>,
) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "polybddc mesh")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in 0..mesh.n_vertices() {
        let p = mesh.vertex(v);
        writeln!(out, "{} {} 0", p.x, p.y)?;
    }
    let size: usize = (0..mesh.n_cells())
        .map(|c| mesh.cell_vertices(c).len() + 1)
        .sum();
    writeln!(out, "CELLS {} {}", mesh.n_cells(), size)?;
    for c in 0..mesh.n_cells() {
        let l = mesh.cell_vertices(c);
        write!(out, "{}", l.len())?;
        for &v in l {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_cells())?;
    for _ in 0..mesh.n_cells() {
        writeln!(out, "7")?; // VTK_POLYGON
    }
    if subdomain.is_some() || cell_scalar.is_some() {
        writeln!(out, "CELL_DATA {}", mesh.n_cells())?;
    }
    if let Some(ids) = subdomain {
        writeln!(out, "SCALARS subdomain int 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for &id in ids {
            writeln!(out, "{id}")?;
        }
    }
    if let Some((name, values)) = cell_scalar {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for &v in values {
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Box2;
    use crate::mesh::{agglomerate, build_cartesian};

    #[test]
    fn vtk_output_has_expected_structure() {
        let m = build_cartesian(2, 2, Box2::unit()).unwrap();
        let p = agglomerate(&m, 2, 1).unwrap();
        let mut buf = Vec::new();
        write_vtk(&m, &mut buf, Some(p.subdomain_ids()), None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[2], "ASCII");
        assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
        assert!(lines.contains(&"POINTS 9 double"));
        assert!(lines.contains(&"CELLS 4 20"));
        assert!(lines.contains(&"CELL_TYPES 4"));
        assert!(lines.contains(&"SCALARS subdomain int 1"));
        // one line per cell with its subdomain id
        assert_eq!(text.lines().filter(|l| *l == "7").count(), 4);
    }
}
