//! 2D polytopal meshes and coarse subdomain partitions.
//!
//! A mesh stores counter-clockwise cell vertex loops and a unique face list.
//! Each face records its vertex pair in the orientation of the *owner* cell
//! (the first cell that traversed it), so the outward normal of the owner is
//! obtained by rotating the face direction clockwise; the neighbor cell, when
//! present, traverses the same edge in the opposite direction.
//!
//! Generators produce Cartesian, simplicial (each Cartesian cell split along
//! its lower-left to upper-right diagonal) and Voronoi-polygonal meshes (the
//! Voronoi diagram of the Cartesian nodes clipped to the domain box). Cell
//! ordering is deterministic and row-major so that agglomeration can assign
//! subdomains by Cartesian block ownership.

mod generate;
mod partition;
mod vtk;

pub use generate::{build_cartesian, simplexify, voronoi_polygonal};
pub use partition::{agglomerate, CoarseFace, CoarsePartition};
pub use vtk::write_vtk;

use crate::error::{Error, Result};
use crate::geometry::{
    polygon_centroid, polygon_diameter, polygon_signed_area, Box2, Point2, Vector2,
};

/// One mesh face (a straight segment between two vertices).
#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex pair in owner-cell traversal order.
    pub vertices: [usize; 2],
    pub owner: usize,
    pub neighbor: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    /// The two adjacent cells, owner first.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.owner).chain(self.neighbor)
    }
}

/// How the mesh was generated; used for agglomeration ownership rules.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshFamily {
    /// `nx x ny` axis-aligned rectangles, row-major (x fastest).
    Cartesian { nx: usize, ny: usize },
    /// Two triangles per Cartesian cell, cells `2 (j nx + i)` and `+1`.
    Simplicial { nx: usize, ny: usize },
    /// One polygon per Cartesian node, node-row-major.
    Voronoi { nx: usize, ny: usize },
    /// Hand-built cell loops; cannot be agglomerated.
    Custom,
}

impl MeshFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Cartesian { .. } => "cartesian",
            MeshFamily::Simplicial { .. } => "simplicial",
            MeshFamily::Voronoi { .. } => "voronoi",
            MeshFamily::Custom => "custom",
        }
    }
}

/// An immutable 2D polytopal mesh.
#[derive(Clone, Debug)]
pub struct PolytopalMesh {
    vertices: Vec<Point2>,
    cells: Vec<Vec<usize>>,
    faces: Vec<Face>,
    cell_faces: Vec<Vec<usize>>,
    cell_centroid: Vec<Point2>,
    cell_diameter: Vec<f64>,
    cell_area: Vec<f64>,
    face_centroid: Vec<Point2>,
    face_length: Vec<f64>,
    mesh_size: f64,
    domain: Box2,
    family: MeshFamily,
}

impl PolytopalMesh {
    /// Build a mesh from vertices and CCW cell loops, deriving faces and
    /// geometric quantities. Fails on empty, non-CCW or non-manifold input.
    pub fn from_cells(
        vertices: Vec<Point2>,
        cells: Vec<Vec<usize>>,
        domain: Box2,
        family: MeshFamily,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Mesh("mesh has no cells".into()));
        }
        let mut faces: Vec<Face> = Vec::new();
        let mut cell_faces = vec![Vec::new(); cells.len()];
        let mut lookup: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        for (c, loop_) in cells.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(Error::Mesh(format!("cell {c} has fewer than 3 vertices")));
            }
            let poly: Vec<Point2> = loop_.iter().map(|&v| vertices[v]).collect();
            if polygon_signed_area(&poly) <= 0.0 {
                return Err(Error::Mesh(format!("cell {c} is not counter-clockwise")));
            }
            for e in 0..loop_.len() {
                let a = loop_[e];
                let b = loop_[(e + 1) % loop_.len()];
                if a == b {
                    return Err(Error::Mesh(format!("cell {c} has a degenerate edge")));
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, faces.len());
                        cell_faces[c].push(faces.len());
                        faces.push(Face {
                            vertices: [a, b],
                            owner: c,
                            neighbor: None,
                        });
                    }
                    Some(&f) => {
                        if faces[f].neighbor.is_some() {
                            return Err(Error::Mesh(format!(
                                "edge ({a}, {b}) is shared by more than two cells"
                            )));
                        }
                        if faces[f].vertices != [b, a] {
                            return Err(Error::Mesh(format!(
                                "edge ({a}, {b}) traversed twice in the same direction"
                            )));
                        }
                        faces[f].neighbor = Some(c);
                        cell_faces[c].push(f);
                    }
                }
            }
        }

        let cell_centroid: Vec<Point2> = cells
            .iter()
            .map(|l| polygon_centroid(&l.iter().map(|&v| vertices[v]).collect::<Vec<_>>()))
            .collect();
        let cell_diameter: Vec<f64> = cells
            .iter()
            .map(|l| polygon_diameter(&l.iter().map(|&v| vertices[v]).collect::<Vec<_>>()))
            .collect();
        let cell_area: Vec<f64> = cells
            .iter()
            .map(|l| polygon_signed_area(&l.iter().map(|&v| vertices[v]).collect::<Vec<_>>()))
            .collect();
        let face_centroid: Vec<Point2> = faces
            .iter()
            .map(|f| {
                let a = vertices[f.vertices[0]];
                let b = vertices[f.vertices[1]];
                Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
            })
            .collect();
        let face_length: Vec<f64> = faces
            .iter()
            .map(|f| (vertices[f.vertices[1]] - vertices[f.vertices[0]]).norm())
            .collect();
        let mesh_size = cell_diameter.iter().cloned().fold(0.0, f64::max);

        let mesh = Self {
            vertices,
            cells,
            faces,
            cell_faces,
            cell_centroid,
            cell_diameter,
            cell_area,
            face_centroid,
            face_length,
            mesh_size,
            domain,
            family,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let area: f64 = self.cell_area.iter().sum();
        let expect = self.domain.area();
        if (area - expect).abs() > 1e-12 * expect {
            return Err(Error::Mesh(format!(
                "cell areas sum to {area}, expected {expect}"
            )));
        }
        for (f, face) in self.faces.iter().enumerate() {
            let ht = self.cell_diameter[face.owner];
            if self.face_length[f] > ht * (1.0 + 1e-12) {
                return Err(Error::Mesh(format!(
                    "face {f} longer than its owner cell diameter"
                )));
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    pub fn vertex(&self, v: usize) -> Point2 {
        self.vertices[v]
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn cell_polygon(&self, c: usize) -> Vec<Point2> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[c]
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell_centroid(&self, c: usize) -> Point2 {
        self.cell_centroid[c]
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        self.cell_diameter[c]
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        self.cell_area[c]
    }

    pub fn face_centroid(&self, f: usize) -> Point2 {
        self.face_centroid[f]
    }

    pub fn face_length(&self, f: usize) -> f64 {
        self.face_length[f]
    }

    /// Face diameter; for straight faces this is the face length.
    pub fn face_diameter(&self, f: usize) -> f64 {
        self.face_length[f]
    }

    /// Endpoints of a face in owner-cell traversal order.
    pub fn face_endpoints(&self, f: usize) -> (Point2, Point2) {
        let fa = &self.faces[f];
        (self.vertices[fa.vertices[0]], self.vertices[fa.vertices[1]])
    }

    /// Unit normal of face `f` pointing out of cell `c` (which must be
    /// adjacent to the face).
    pub fn outward_normal(&self, f: usize, c: usize) -> Vector2 {
        let face = &self.faces[f];
        let (a, b) = self.face_endpoints(f);
        let t = (b - a) / self.face_length[f];
        // for the CCW owner loop, outward is the clockwise rotation of t
        let n = Vector2::new(t.y, -t.x);
        if face.owner == c {
            n
        } else {
            debug_assert_eq!(face.neighbor, Some(c));
            -n
        }
    }

    /// Global mesh size `h = max_t h_t`.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    /// Quasi-uniformity ratio `max_t h / h_t`.
    pub fn quasi_uniformity_ratio(&self) -> f64 {
        let min = self.cell_diameter.iter().cloned().fold(f64::INFINITY, f64::min);
        self.mesh_size / min
    }

    pub fn domain(&self) -> Box2 {
        self.domain
    }

    pub fn family(&self) -> &MeshFamily {
        &self.family
    }

    pub fn total_area(&self) -> f64 {
        self.cell_area.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cartesian_counts_match_closed_forms() {
        let m = build_cartesian(1, 1, Box2::unit()).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.n_faces(), 4);
        assert_eq!(m.n_interior_faces(), 0);

        let m = build_cartesian(2, 2, Box2::unit()).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_faces(), 12);
        assert_eq!(m.n_interior_faces(), 4);

        // 2 nx ny + nx + ny faces in general
        for (nx, ny) in [(3, 5), (4, 4), (7, 2)] {
            let m = build_cartesian(nx, ny, Box2::unit()).unwrap();
            assert_eq!(m.n_faces(), 2 * nx * ny + nx + ny);
        }
    }

    #[test]
    fn cartesian_mesh_size_and_area() {
        let m = build_cartesian(4, 4, Box2::unit()).unwrap();
        assert_relative_eq!(m.mesh_size(), 2f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_relative_eq!(m.total_area(), 1.0, epsilon = 1e-13);
        assert_relative_eq!(m.quasi_uniformity_ratio(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(build_cartesian(0, 1, Box2::unit()).is_err());
        assert!(build_cartesian(1, 0, Box2::unit()).is_err());
    }

    #[test]
    fn simplexify_counts_and_area() {
        let m = simplexify(&build_cartesian(1, 1, Box2::unit()).unwrap()).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_faces(), 5);
        assert_eq!(m.n_interior_faces(), 1);

        let m = simplexify(&build_cartesian(2, 2, Box2::unit()).unwrap()).unwrap();
        assert_eq!(m.n_cells(), 8);
        assert_relative_eq!(m.total_area(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn simplexify_interior_face_count_matches_adjacency_oracle() {
        let m = simplexify(&build_cartesian(4, 4, Box2::unit()).unwrap()).unwrap();
        // brute-force oracle: count sorted-vertex-pair edges seen twice
        let mut seen = std::collections::HashMap::new();
        for c in 0..m.n_cells() {
            let l = m.cell_vertices(c);
            for e in 0..l.len() {
                let a = l[e];
                let b = l[(e + 1) % l.len()];
                *seen.entry((a.min(b), a.max(b))).or_insert(0usize) += 1;
            }
        }
        let interior = seen.values().filter(|&&cnt| cnt == 2).count();
        assert_eq!(interior, 40, "2 * (4 * 3) + 16 diagonal faces");
        assert_eq!(m.n_interior_faces(), interior);
    }

    #[test]
    fn simplexify_rejects_non_cartesian() {
        let tri = simplexify(&build_cartesian(2, 2, Box2::unit()).unwrap()).unwrap();
        assert!(simplexify(&tri).is_err());
    }

    #[test]
    fn interior_faces_have_two_cells_with_opposite_orientation() {
        let m = simplexify(&build_cartesian(3, 3, Box2::unit()).unwrap()).unwrap();
        for f in 0..m.n_faces() {
            let face = m.face(f);
            let mut count = 0;
            for c in 0..m.n_cells() {
                let l = m.cell_vertices(c);
                for e in 0..l.len() {
                    let a = l[e];
                    let b = l[(e + 1) % l.len()];
                    if [a, b] == face.vertices {
                        assert_eq!(c, face.owner);
                        count += 1;
                    } else if [b, a] == face.vertices {
                        assert_eq!(Some(c), face.neighbor);
                        count += 1;
                    }
                }
            }
            assert_eq!(count, if face.is_boundary() { 1 } else { 2 });
        }
    }

    #[test]
    fn outward_normals_point_away_from_centroids() {
        for mesh in [
            build_cartesian(3, 2, Box2::unit()).unwrap(),
            simplexify(&build_cartesian(3, 3, Box2::unit()).unwrap()).unwrap(),
            voronoi_polygonal(3, 3, Box2::unit()).unwrap(),
        ] {
            for c in 0..mesh.n_cells() {
                for &f in mesh.cell_faces(c) {
                    let n = mesh.outward_normal(f, c);
                    let d = mesh.face_centroid(f) - mesh.cell_centroid(c);
                    assert!(n.dot(&d) > 0.0, "normal points outward");
                }
            }
        }
    }

    #[test]
    fn voronoi_counts_and_geometry() {
        // one cell per corner node
        let m = voronoi_polygonal(1, 1, Box2::unit()).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_relative_eq!(m.total_area(), 1.0, epsilon = 1e-13);

        // 3 x 3 node grid: interior cell is a square of side 1/2 at the node
        let m = voronoi_polygonal(2, 2, Box2::unit()).unwrap();
        assert_eq!(m.n_cells(), 9);
        let interior = 4; // node (1,1) in node-row-major order
        assert_relative_eq!(m.cell_area(interior), 0.25, epsilon = 1e-13);
        let c = m.cell_centroid(interior);
        assert_relative_eq!(c.x, 0.5, epsilon = 1e-13);
        assert_relative_eq!(c.y, 0.5, epsilon = 1e-13);

        for (nx, ny) in [(1, 2), (4, 4), (5, 3)] {
            let m = voronoi_polygonal(nx, ny, Box2::unit()).unwrap();
            assert_eq!(m.n_cells(), (nx + 1) * (ny + 1));
            assert_relative_eq!(m.total_area(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn voronoi_quasi_uniformity_bounded() {
        for n in [2usize, 4, 8] {
            let m = voronoi_polygonal(n, n, Box2::unit()).unwrap();
            assert!(m.quasi_uniformity_ratio() <= 4.0);
        }
        let c = build_cartesian(8, 8, Box2::unit()).unwrap();
        assert!(c.quasi_uniformity_ratio() <= 4.0);
        assert!(simplexify(&c).unwrap().quasi_uniformity_ratio() <= 4.0);
    }

    #[test]
    fn face_shorter_than_cell_diameter() {
        for mesh in [
            build_cartesian(4, 3, Box2::unit()).unwrap(),
            voronoi_polygonal(4, 4, Box2::unit()).unwrap(),
        ] {
            for c in 0..mesh.n_cells() {
                for &f in mesh.cell_faces(c) {
                    assert!(mesh.face_length(f) <= mesh.cell_diameter(c) * (1.0 + 1e-12));
                }
            }
        }
    }
}
