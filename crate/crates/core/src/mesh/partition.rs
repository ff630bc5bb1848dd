//! Coarse subdomain partitions by agglomeration of the fine mesh.

use super::{MeshFamily, PolytopalMesh};
use crate::error::{Error, Result};

/// The interface between two subdomains: a connected-by-construction list of
/// fine faces whose adjacent cells lie in the two subdomains.
#[derive(Clone, Debug)]
pub struct CoarseFace {
    /// Adjacent subdomain pair, smaller id first.
    pub subdomains: (usize, usize),
    /// Fine faces tiling the interface, ascending face id.
    pub fine_faces: Vec<usize>,
    /// Total length of the interface.
    pub measure: f64,
}

/// Partition of the fine cells into `npx x npy` subdomains.
#[derive(Clone, Debug)]
pub struct CoarsePartition {
    grid: (usize, usize),
    subdomain_of_cell: Vec<usize>,
    cells_of: Vec<Vec<usize>>,
    coarse_faces: Vec<CoarseFace>,
    /// Coarse face id per fine face, when the fine face lies on an interface.
    coarse_face_of_fine: Vec<Option<usize>>,
    coarse_size: f64,
}

impl CoarsePartition {
    pub fn n_subdomains(&self) -> usize {
        self.cells_of.len()
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn subdomain_of_cell(&self, c: usize) -> usize {
        self.subdomain_of_cell[c]
    }

    pub fn cells_of(&self, t: usize) -> &[usize] {
        &self.cells_of[t]
    }

    pub fn subdomain_ids(&self) -> &[usize] {
        &self.subdomain_of_cell
    }

    pub fn coarse_faces(&self) -> &[CoarseFace] {
        &self.coarse_faces
    }

    pub fn coarse_face_of_fine(&self, f: usize) -> Option<usize> {
        self.coarse_face_of_fine[f]
    }

    /// Coarse mesh size `H = max_T diam(T)`.
    pub fn coarse_size(&self) -> f64 {
        self.coarse_size
    }

    /// Whether a fine face separates two subdomains.
    pub fn is_interface_face(&self, mesh: &PolytopalMesh, f: usize) -> bool {
        let face = mesh.face(f);
        match face.neighbor {
            Some(nb) => self.subdomain_of_cell[face.owner] != self.subdomain_of_cell[nb],
            None => false,
        }
    }
}

/// Assign subdomains by Cartesian block ownership. Cells of Cartesian and
/// simplicial meshes follow their parent Cartesian cell; Voronoi cells follow
/// their node, attributed to the block of the adjacent cell (clamped at the
/// domain edge).
pub fn agglomerate(mesh: &PolytopalMesh, npx: usize, npy: usize) -> Result<CoarsePartition> {
    if npx == 0 || npy == 0 {
        return Err(Error::invalid("need at least one subdomain per direction"));
    }
    if npx * npy > mesh.n_cells() {
        return Err(Error::invalid(format!(
            "{} subdomains exceed the {} cells of the mesh",
            npx * npy,
            mesh.n_cells()
        )));
    }
    let block_1d = |idx: usize, n: usize, np: usize| -> usize { (idx * np) / n };
    let subdomain_of_cell: Vec<usize> = match *mesh.family() {
        MeshFamily::Cartesian { nx, ny } => (0..mesh.n_cells())
            .map(|c| {
                let (i, j) = (c % nx, c / nx);
                block_1d(j, ny, npy) * npx + block_1d(i, nx, npx)
            })
            .collect(),
        MeshFamily::Simplicial { nx, ny } => (0..mesh.n_cells())
            .map(|c| {
                let parent = c / 2;
                let (i, j) = (parent % nx, parent / nx);
                block_1d(j, ny, npy) * npx + block_1d(i, nx, npx)
            })
            .collect(),
        MeshFamily::Voronoi { nx, ny } => (0..mesh.n_cells())
            .map(|c| {
                let (ni, nj) = (c % (nx + 1), c / (nx + 1));
                let ci = ni.min(nx - 1);
                let cj = nj.min(ny - 1);
                block_1d(cj, ny, npy) * npx + block_1d(ci, nx, npx)
            })
            .collect(),
        MeshFamily::Custom => {
            return Err(Error::invalid(
                "agglomeration needs a mesh with Cartesian block ownership",
            ))
        }
    };

    let n_sub = npx * npy;
    let mut cells_of = vec![Vec::new(); n_sub];
    for (c, &t) in subdomain_of_cell.iter().enumerate() {
        cells_of[t].push(c);
    }
    if cells_of.iter().any(|cells| cells.is_empty()) {
        return Err(Error::invalid("partition produced an empty subdomain"));
    }

    // coarse faces, keyed by the subdomain pair
    let mut groups: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
        std::collections::BTreeMap::new();
    for f in 0..mesh.n_faces() {
        let face = mesh.face(f);
        if let Some(nb) = face.neighbor {
            let (a, b) = (subdomain_of_cell[face.owner], subdomain_of_cell[nb]);
            if a != b {
                groups.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
    }
    let mut coarse_faces = Vec::with_capacity(groups.len());
    let mut coarse_face_of_fine = vec![None; mesh.n_faces()];
    for ((a, b), mut fine) in groups {
        fine.sort_unstable();
        let measure = fine.iter().map(|&f| mesh.face_length(f)).sum();
        for &f in &fine {
            coarse_face_of_fine[f] = Some(coarse_faces.len());
        }
        coarse_faces.push(CoarseFace {
            subdomains: (a, b),
            fine_faces: fine,
            measure,
        });
    }

    // H = max over subdomains of the vertex-set diameter
    let mut coarse_size: f64 = 0.0;
    for cells in &cells_of {
        let mut verts: Vec<usize> = cells
            .iter()
            .flat_map(|&c| mesh.cell_vertices(c).iter().copied())
            .collect();
        verts.sort_unstable();
        verts.dedup();
        for i in 0..verts.len() {
            for j in (i + 1)..verts.len() {
                let d = (mesh.vertex(verts[i]) - mesh.vertex(verts[j])).norm();
                coarse_size = coarse_size.max(d);
            }
        }
    }

    Ok(CoarsePartition {
        grid: (npx, npy),
        subdomain_of_cell,
        cells_of,
        coarse_faces,
        coarse_face_of_fine,
        coarse_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Box2;
    use crate::mesh::{build_cartesian, simplexify, voronoi_polygonal};

    #[test]
    fn cartesian_block_partition() {
        let m = build_cartesian(8, 8, Box2::unit()).unwrap();
        let p = agglomerate(&m, 2, 2).unwrap();
        assert_eq!(p.n_subdomains(), 4);
        for t in 0..4 {
            assert_eq!(p.cells_of(t).len(), 16);
        }
        assert_eq!(p.coarse_faces().len(), 4);
        for cf in p.coarse_faces() {
            assert_eq!(cf.fine_faces.len(), 4);
            assert!(cf.measure > 0.0);
        }
        // H = diameter of a 4x4 block of 1/8 cells
        approx::assert_relative_eq!(p.coarse_size(), 0.5 * 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn simplicial_partition_inherits_parent_owner() {
        let m = simplexify(&build_cartesian(8, 8, Box2::unit()).unwrap()).unwrap();
        let p = agglomerate(&m, 2, 2).unwrap();
        assert_eq!(p.n_subdomains(), 4);
        for t in 0..4 {
            assert_eq!(p.cells_of(t).len(), 32);
        }
        // the two triangles of each parent share its owner
        for c in (0..m.n_cells()).step_by(2) {
            assert_eq!(p.subdomain_of_cell(c), p.subdomain_of_cell(c + 1));
        }
    }

    #[test]
    fn voronoi_partition_by_node_ownership_tiles_interfaces() {
        let m = voronoi_polygonal(8, 8, Box2::unit()).unwrap();
        assert_eq!(m.n_cells(), 81);
        let p = agglomerate(&m, 2, 2).unwrap();
        let total: usize = (0..4).map(|t| p.cells_of(t).len()).sum();
        assert_eq!(total, 81);

        // oracle: a fine face lies on a coarse interface iff its two cells
        // have different subdomain ids, and then belongs to exactly one
        // coarse face
        for f in 0..m.n_faces() {
            let face = m.face(f);
            let on_interface = match face.neighbor {
                Some(nb) => p.subdomain_of_cell(face.owner) != p.subdomain_of_cell(nb),
                None => false,
            };
            assert_eq!(on_interface, p.coarse_face_of_fine(f).is_some());
            if let Some(cf) = p.coarse_face_of_fine(f) {
                let listed = p.coarse_faces()[cf].fine_faces.contains(&f);
                assert!(listed);
                let elsewhere = p
                    .coarse_faces()
                    .iter()
                    .enumerate()
                    .filter(|(i, c)| *i != cf && c.fine_faces.contains(&f))
                    .count();
                assert_eq!(elsewhere, 0);
            }
        }
    }

    #[test]
    fn partition_rejections() {
        let m = build_cartesian(2, 2, Box2::unit()).unwrap();
        assert!(agglomerate(&m, 3, 3, ).is_err());
        assert!(agglomerate(&m, 0, 1).is_err());
        assert!(agglomerate(&m, 2, 2).is_ok());
    }

    #[test]
    fn subdomains_partition_all_cells() {
        let m = simplexify(&build_cartesian(4, 4, Box2::unit()).unwrap()).unwrap();
        let p = agglomerate(&m, 2, 2).unwrap();
        let mut seen = vec![false; m.n_cells()];
        for t in 0..p.n_subdomains() {
            for &c in p.cells_of(t) {
                assert!(!seen[c]);
                seen[c] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
