//! Mesh generators: Cartesian grids, their simplicial subdivision, and the
//! Voronoi diagram of the grid nodes clipped to the domain box.

use super::{MeshFamily, PolytopalMesh};
use crate::error::{Error, Result};
use crate::geometry::{clip_convex_by_halfplane, Box2, Point2};

/// Build an `nx x ny` Cartesian mesh of `domain`, cells row-major (x fastest).
pub fn build_cartesian(nx: usize, ny: usize, domain: Box2) -> Result<PolytopalMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("cartesian mesh needs nx, ny >= 1"));
    }
    if domain.width() <= 0.0 || domain.height() <= 0.0 {
        return Err(Error::invalid("domain box must have positive extent"));
    }
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point2::new(
                domain.x0 + i as f64 * dx,
                domain.y0 + j as f64 * dy,
            ));
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    PolytopalMesh::from_cells(vertices, cells, domain, MeshFamily::Cartesian { nx, ny })
}

/// Split each Cartesian cell into two triangles along its lower-left to
/// upper-right diagonal. Triangles `2c` and `2c + 1` inherit cell `c`.
pub fn simplexify(m: &PolytopalMesh) -> Result<PolytopalMesh> {
    let MeshFamily::Cartesian { nx, ny } = *m.family() else {
        return Err(Error::invalid("simplexify expects a Cartesian mesh"));
    };
    let vertices: Vec<Point2> = (0..m.n_vertices()).map(|v| m.vertex(v)).collect();
    let mut cells = Vec::with_capacity(2 * m.n_cells());
    for c in 0..m.n_cells() {
        let l = m.cell_vertices(c);
        debug_assert_eq!(l.len(), 4);
        // quad loop starts at the lower-left corner by construction
        cells.push(vec![l[0], l[1], l[2]]);
        cells.push(vec![l[0], l[2], l[3]]);
    }
    PolytopalMesh::from_cells(vertices, cells, m.domain(), MeshFamily::Simplicial { nx, ny })
}

/// Voronoi diagram of the `(nx+1) x (ny+1)` Cartesian nodes of `domain`,
/// clipped to the box. Cells are node-row-major; on a uniform grid the
/// four-way corner degeneracies collapse to plain rectangle corners.
pub fn voronoi_polygonal(nx: usize, ny: usize, domain: Box2) -> Result<PolytopalMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("voronoi mesh needs nx, ny >= 1"));
    }
    let dx = domain.width() / nx as f64;
    let dy = domain.height() / ny as f64;
    let site = |i: usize, j: usize| {
        Point2::new(domain.x0 + i as f64 * dx, domain.y0 + j as f64 * dy)
    };
    let collapse_tol = 1e-12 * dx.max(dy);
    let snap = 1e-7 * dx.min(dy);

    let mut loops: Vec<Vec<Point2>> = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let p = site(i, j);
            let mut poly: Vec<Point2> = domain.corners().to_vec();
            // clip by the bisectors of nearby sites, fixed traversal order
            for dj in -2i64..=2 {
                for di in -2i64..=2 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let qi = i as i64 + di;
                    let qj = j as i64 + dj;
                    if qi < 0 || qj < 0 || qi > nx as i64 || qj > ny as i64 {
                        continue;
                    }
                    let q = site(qi as usize, qj as usize);
                    // |x - p|^2 <= |x - q|^2  <=>  2 (q - p) . x <= |q|^2 - |p|^2
                    let n = (q - p) * 2.0;
                    let c = q.coords.norm_squared() - p.coords.norm_squared();
                    poly = clip_convex_by_halfplane(&poly, n, c);
                    if poly.is_empty() {
                        return Err(Error::Mesh(format!(
                            "voronoi cell of node ({i}, {j}) clipped away"
                        )));
                    }
                }
            }
            // collapse degenerate edges left over from four-way corners
            let mut cleaned: Vec<Point2> = Vec::with_capacity(poly.len());
            for &v in &poly {
                if cleaned.last().map_or(true, |&u| (u - v).norm() > collapse_tol) {
                    cleaned.push(v);
                }
            }
            while cleaned.len() > 1
                && (cleaned[0] - *cleaned.last().unwrap()).norm() <= collapse_tol
            {
                cleaned.pop();
            }
            if cleaned.len() < 3 {
                return Err(Error::Mesh(format!(
                    "voronoi cell of node ({i}, {j}) failed to close"
                )));
            }
            loops.push(cleaned);
        }
    }

    // deduplicate vertices by snapping to a fine lattice
    let mut vertices: Vec<Point2> = Vec::new();
    let mut ids: std::collections::HashMap<(i64, i64), usize> = std::collections::HashMap::new();
    let mut cells = Vec::with_capacity(loops.len());
    for poly in &loops {
        let mut cell = Vec::with_capacity(poly.len());
        for &v in poly {
            let key = ((v.x / snap).round() as i64, (v.y / snap).round() as i64);
            let id = *ids.entry(key).or_insert_with(|| {
                vertices.push(v);
                vertices.len() - 1
            });
            cell.push(id);
        }
        cell.dedup();
        if cell.len() >= 2 && cell[0] == *cell.last().unwrap() {
            cell.pop();
        }
        if cell.len() < 3 {
            return Err(Error::Mesh("voronoi cell degenerated after snapping".into()));
        }
        cells.push(cell);
    }
    PolytopalMesh::from_cells(vertices, cells, domain, MeshFamily::Voronoi { nx, ny })
}
