//! Hybrid polynomial spaces: independent unknowns on cells and faces.
//!
//! DOF layout: all cell blocks first (cell-major), then all face blocks in
//! face-id order. Face unknowns are single-valued, so the skeleton component
//! is conforming; the boundary space gathers the blocks of boundary faces in
//! ascending face-id order.

use crate::basis::{self, CellBasis, FaceBasis};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::{CoarsePartition, PolytopalMesh};
use crate::quadrature::{polygon_rule, segment_rule, QuadratureRule};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Degree-of-freedom layout plus per-entity bases and quadrature.
pub struct HybridSpace {
    mesh: Arc<PolytopalMesh>,
    cell_degree: usize,
    face_degree: usize,
    cell_basis: Vec<CellBasis>,
    face_basis: Vec<FaceBasis>,
    cell_mass: Vec<DMatrix<f64>>,
    face_mass: Vec<DMatrix<f64>>,
    cell_quad: Vec<QuadratureRule>,
    face_quad: Vec<QuadratureRule>,
    boundary_faces: Vec<usize>,
    boundary_block_of_face: Vec<Option<usize>>,
    max_mass_condition: f64,
}

impl HybridSpace {
    /// Build the space with cell polynomials of degree `cell_degree` and face
    /// polynomials of degree `face_degree`. Bases are re-orthonormalized on
    /// entities whose mass matrix is badly conditioned.
    pub fn new(mesh: Arc<PolytopalMesh>, cell_degree: usize, face_degree: usize) -> Result<Self> {
        let quad_degree = 2 * cell_degree.max(face_degree + 1) + 2;
        let mut cell_basis = Vec::with_capacity(mesh.n_cells());
        let mut cell_mass = Vec::with_capacity(mesh.n_cells());
        let mut cell_quad = Vec::with_capacity(mesh.n_cells());
        let mut max_cond: f64 = 0.0;
        for c in 0..mesh.n_cells() {
            let poly = mesh.cell_polygon(c);
            let quad = polygon_rule(&poly, mesh.cell_centroid(c), quad_degree)?;
            let mut b = CellBasis::new(mesh.cell_centroid(c), mesh.cell_diameter(c), cell_degree);
            let mut mass = basis::mass_matrix(&quad, |x| b.eval(x));
            let cond = b.orthonormalize_if_needed(&mass)?;
            if cond > basis::ORTHO_CONDITION_THRESHOLD {
                mass = basis::mass_matrix(&quad, |x| b.eval(x));
            }
            max_cond = max_cond.max(cond);
            cell_basis.push(b);
            cell_mass.push(mass);
            cell_quad.push(quad);
        }

        let mut face_basis = Vec::with_capacity(mesh.n_faces());
        let mut face_mass = Vec::with_capacity(mesh.n_faces());
        let mut face_quad = Vec::with_capacity(mesh.n_faces());
        for f in 0..mesh.n_faces() {
            let (a, b) = mesh.face_endpoints(f);
            let quad = segment_rule(a, b, quad_degree);
            let mut fb = FaceBasis::new(a, b, face_degree);
            let mut mass = basis::mass_matrix(&quad, |x| fb.eval(x));
            let cond = fb.orthonormalize_if_needed(&mass)?;
            if cond > basis::ORTHO_CONDITION_THRESHOLD {
                mass = basis::mass_matrix(&quad, |x| fb.eval(x));
            }
            max_cond = max_cond.max(cond);
            face_basis.push(fb);
            face_mass.push(mass);
            face_quad.push(quad);
        }

        let boundary_faces: Vec<usize> = (0..mesh.n_faces())
            .filter(|&f| mesh.face(f).is_boundary())
            .collect();
        let mut boundary_block_of_face = vec![None; mesh.n_faces()];
        for (b, &f) in boundary_faces.iter().enumerate() {
            boundary_block_of_face[f] = Some(b);
        }

        Ok(Self {
            mesh,
            cell_degree,
            face_degree,
            cell_basis,
            face_basis,
            cell_mass,
            face_mass,
            cell_quad,
            face_quad,
            boundary_faces,
            boundary_block_of_face,
            max_mass_condition: max_cond,
        })
    }

    pub fn mesh(&self) -> &PolytopalMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<PolytopalMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn cell_degree(&self) -> usize {
        self.cell_degree
    }

    pub fn face_degree(&self) -> usize {
        self.face_degree
    }

    pub fn cell_block_size(&self) -> usize {
        basis::cell_dim(self.cell_degree)
    }

    pub fn face_block_size(&self) -> usize {
        self.face_degree + 1
    }

    pub fn n_cell_dofs(&self) -> usize {
        self.mesh.n_cells() * self.cell_block_size()
    }

    pub fn n_face_dofs(&self) -> usize {
        self.mesh.n_faces() * self.face_block_size()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_cell_dofs() + self.n_face_dofs()
    }

    pub fn cell_dof_range(&self, c: usize) -> std::ops::Range<usize> {
        let s = self.cell_block_size();
        c * s..(c + 1) * s
    }

    pub fn face_dof_range(&self, f: usize) -> std::ops::Range<usize> {
        let s = self.face_block_size();
        let base = self.n_cell_dofs();
        base + f * s..base + (f + 1) * s
    }

    /// Largest mass-matrix condition number observed over all entities.
    pub fn max_mass_condition(&self) -> f64 {
        self.max_mass_condition
    }

    pub fn cell_basis(&self, c: usize) -> &CellBasis {
        &self.cell_basis[c]
    }

    pub fn face_basis(&self, f: usize) -> &FaceBasis {
        &self.face_basis[f]
    }

    pub fn cell_mass(&self, c: usize) -> &DMatrix<f64> {
        &self.cell_mass[c]
    }

    pub fn face_mass(&self, f: usize) -> &DMatrix<f64> {
        &self.face_mass[f]
    }

    pub fn cell_quad(&self, c: usize) -> &QuadratureRule {
        &self.cell_quad[c]
    }

    pub fn face_quad(&self, f: usize) -> &QuadratureRule {
        &self.face_quad[f]
    }

    /// Boundary faces in ascending face-id order.
    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    pub fn n_boundary_dofs(&self) -> usize {
        self.boundary_faces.len() * self.face_block_size()
    }

    /// Block index of a face in the boundary space, if it is a boundary face.
    pub fn boundary_block_of_face(&self, f: usize) -> Option<usize> {
        self.boundary_block_of_face[f]
    }

    pub fn boundary_dof_range(&self, block: usize) -> std::ops::Range<usize> {
        let s = self.face_block_size();
        block * s..(block + 1) * s
    }

    /// Componentwise `L^2` projection of a smooth function onto all cell and
    /// face blocks.
    pub fn interpolate(&self, g: impl Fn(Point2) -> f64) -> Result<HybridVector> {
        let mut data = DVector::zeros(self.n_dofs());
        for c in 0..self.mesh.n_cells() {
            let coeffs = basis::l2_project(
                &self.cell_mass[c],
                &self.cell_quad[c],
                |x| self.cell_basis[c].eval(x),
                &g,
            )?;
            data.rows_mut(self.cell_dof_range(c).start, coeffs.len())
                .copy_from(&coeffs);
        }
        for f in 0..self.mesh.n_faces() {
            let coeffs = basis::l2_project(
                &self.face_mass[f],
                &self.face_quad[f],
                |x| self.face_basis[f].eval(x),
                &g,
            )?;
            data.rows_mut(self.face_dof_range(f).start, coeffs.len())
                .copy_from(&coeffs);
        }
        Ok(HybridVector { data })
    }

    /// Trace operator: copy the boundary-face blocks.
    pub fn trace(&self, v: &HybridVector) -> BoundaryFunction {
        let mut data = DVector::zeros(self.n_boundary_dofs());
        for (b, &f) in self.boundary_faces.iter().enumerate() {
            let src = v.data.rows(self.face_dof_range(f).start, self.face_block_size());
            data.rows_mut(self.boundary_dof_range(b).start, self.face_block_size())
                .copy_from(&src);
        }
        BoundaryFunction { data }
    }

    /// Extension of a boundary function by zero on cells and interior faces.
    pub fn lift_by_zero(&self, w: &BoundaryFunction) -> HybridVector {
        let mut data = DVector::zeros(self.n_dofs());
        for (b, &f) in self.boundary_faces.iter().enumerate() {
            let src = w.data.rows(self.boundary_dof_range(b).start, self.face_block_size());
            data.rows_mut(self.face_dof_range(f).start, self.face_block_size())
                .copy_from(&src);
        }
        HybridVector { data }
    }

    /// Boundary function representing the constant 1.
    pub fn boundary_constant(&self) -> Result<BoundaryFunction> {
        let mut data = DVector::zeros(self.n_boundary_dofs());
        for (b, &f) in self.boundary_faces.iter().enumerate() {
            let coeffs = basis::l2_project(
                &self.face_mass[f],
                &self.face_quad[f],
                |x| self.face_basis[f].eval(x),
                |_| 1.0,
            )?;
            data.rows_mut(self.boundary_dof_range(b).start, coeffs.len())
                .copy_from(&coeffs);
        }
        Ok(BoundaryFunction { data })
    }

    /// Evaluate the cell component at a point of cell `c`.
    pub fn eval_cell(&self, v: &HybridVector, c: usize, x: Point2) -> f64 {
        let range = self.cell_dof_range(c);
        let coeffs = v.data.rows(range.start, range.len());
        self.cell_basis[c].eval(x).dot(&coeffs.clone_owned())
    }

    /// Gather the cells and faces of a subdomain with their local layout.
    pub fn subdomain_gather(&self, partition: &CoarsePartition, t: usize) -> Result<SubdomainGather> {
        if t >= partition.n_subdomains() {
            return Err(Error::invalid(format!("subdomain {t} out of range")));
        }
        let cells: Vec<usize> = partition.cells_of(t).to_vec();
        let mut faces: Vec<usize> = cells
            .iter()
            .flat_map(|&c| self.mesh.cell_faces(c).iter().copied())
            .collect();
        faces.sort_unstable();
        faces.dedup();
        Ok(SubdomainGather { cells, faces })
    }

    /// Restrict a global hybrid vector to a subdomain's local layout
    /// (local cells first, then local faces, both ascending global id).
    pub fn restrict_to_subdomain(
        &self,
        gather: &SubdomainGather,
        v: &HybridVector,
    ) -> DVector<f64> {
        let cs = self.cell_block_size();
        let fs = self.face_block_size();
        let mut out = DVector::zeros(gather.cells.len() * cs + gather.faces.len() * fs);
        for (lc, &c) in gather.cells.iter().enumerate() {
            out.rows_mut(lc * cs, cs)
                .copy_from(&v.data.rows(self.cell_dof_range(c).start, cs));
        }
        let base = gather.cells.len() * cs;
        for (lf, &f) in gather.faces.iter().enumerate() {
            out.rows_mut(base + lf * fs, fs)
                .copy_from(&v.data.rows(self.face_dof_range(f).start, fs));
        }
        out
    }
}

/// Coefficients of a hybrid function, aligned with a [`HybridSpace`].
#[derive(Clone, Debug)]
pub struct HybridVector {
    pub data: DVector<f64>,
}

impl HybridVector {
    pub fn zeros(space: &HybridSpace) -> Self {
        Self {
            data: DVector::zeros(space.n_dofs()),
        }
    }
}

/// Coefficients on boundary-face blocks only.
#[derive(Clone, Debug)]
pub struct BoundaryFunction {
    pub data: DVector<f64>,
}

/// Cells and faces of one subdomain, ascending global ids.
#[derive(Clone, Debug)]
pub struct SubdomainGather {
    pub cells: Vec<usize>,
    pub faces: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Box2;
    use crate::mesh::{agglomerate, build_cartesian, simplexify};
    use approx::assert_relative_eq;

    fn space(n: usize, k: usize) -> HybridSpace {
        let mesh = Arc::new(build_cartesian(n, n, Box2::unit()).unwrap());
        HybridSpace::new(mesh, k, k).unwrap()
    }

    #[test]
    fn dof_layout_is_disjoint_and_complete() {
        let s = space(3, 1);
        assert_eq!(s.n_dofs(), s.n_cell_dofs() + s.n_face_dofs());
        let mut hits = vec![0usize; s.n_dofs()];
        for c in 0..s.mesh().n_cells() {
            for i in s.cell_dof_range(c) {
                hits[i] += 1;
            }
        }
        for f in 0..s.mesh().n_faces() {
            for i in s.face_dof_range(f) {
                hits[i] += 1;
            }
        }
        assert!(hits.iter().all(|&h| h == 1));
    }

    #[test]
    fn interpolation_reproduces_constants_and_linears() {
        let s = space(4, 1);
        let v = s.interpolate(|_| 1.0).unwrap();
        for c in 0..s.mesh().n_cells() {
            let x = s.mesh().cell_centroid(c);
            assert_relative_eq!(s.eval_cell(&v, c, x), 1.0, epsilon = 1e-13);
        }
        // linear g(x, y) = x is reproduced exactly for k >= 1
        let g = |p: Point2| p.x;
        let v = s.interpolate(g).unwrap();
        let mut err2 = 0.0;
        for c in 0..s.mesh().n_cells() {
            let quad = s.cell_quad(c);
            err2 += quad.integrate(|x| {
                let d = s.eval_cell(&v, c, x) - g(x);
                d * d
            });
        }
        assert!(err2.sqrt() < 1e-12);
    }

    #[test]
    fn interpolation_error_decays_at_expected_rate() {
        // L2 error of the cell interpolant of sin(2 pi x) shrinks ~ 2^{k+1}
        // per refinement
        for k in [0usize, 1] {
            let mut errs = Vec::new();
            for n in [8usize, 16, 32] {
                let s = space(n, k);
                let g = |p: Point2| (2.0 * std::f64::consts::PI * p.x).sin();
                let v = s.interpolate(g).unwrap();
                let mut err2 = 0.0;
                for c in 0..s.mesh().n_cells() {
                    let poly = s.mesh().cell_polygon(c);
                    let quad = crate::quadrature::polygon_rule(
                        &poly,
                        s.mesh().cell_centroid(c),
                        2 * k + 8,
                    )
                    .unwrap();
                    err2 += quad.integrate(|x| {
                        let d = s.eval_cell(&v, c, x) - g(x);
                        d * d
                    });
                }
                errs.push(err2.sqrt());
            }
            for w in errs.windows(2) {
                let rate = (w[0] / w[1]).log2();
                assert!(
                    rate > k as f64 + 0.8,
                    "k = {k}: observed interpolation rate {rate}"
                );
            }
        }
    }

    #[test]
    fn trace_roundtrip_and_zero_boundary() {
        let s = space(4, 2);
        let v = s.interpolate(|p| p.x * p.y + 1.0).unwrap();
        let w = s.trace(&v);
        assert_eq!(w.data.len(), s.n_boundary_dofs());
        // trace of lift-by-zero is the identity on boundary blocks
        let lifted = s.lift_by_zero(&w);
        let w2 = s.trace(&lifted);
        assert_relative_eq!((&w.data - &w2.data).norm(), 0.0, epsilon = 1e-15);

        // zero boundary blocks give a zero boundary function
        let mut v2 = v.clone();
        for &f in s.boundary_faces() {
            for i in s.face_dof_range(f) {
                v2.data[i] = 0.0;
            }
        }
        assert_eq!(s.trace(&v2).data.norm(), 0.0);
    }

    #[test]
    fn constant_trace_is_constant() {
        let s = space(3, 1);
        let v = s.interpolate(|_| 4.25).unwrap();
        let w = s.trace(&v);
        let ones = s.boundary_constant().unwrap();
        assert_relative_eq!((&w.data - &(ones.data * 4.25)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn subdomain_restriction_is_consistent_across_interfaces() {
        let mesh = Arc::new(simplexify(&build_cartesian(4, 4, Box2::unit()).unwrap()).unwrap());
        let part = agglomerate(&mesh, 2, 2).unwrap();
        let s = HybridSpace::new(mesh, 1, 1).unwrap();
        let v = s.interpolate(|p| p.x + 2.0 * p.y).unwrap();

        let g0 = s.subdomain_gather(&part, 0).unwrap();
        let g1 = s.subdomain_gather(&part, 1).unwrap();
        let l0 = s.restrict_to_subdomain(&g0, &v);
        let l1 = s.restrict_to_subdomain(&g1, &v);
        // shared faces carry identical blocks in both local vectors
        let fs = s.face_block_size();
        for (i0, &f) in g0.faces.iter().enumerate() {
            if let Some(i1) = g1.faces.iter().position(|&g| g == f) {
                let b0 = l0.rows(g0.cells.len() * s.cell_block_size() + i0 * fs, fs);
                let b1 = l1.rows(g1.cells.len() * s.cell_block_size() + i1 * fs, fs);
                assert_relative_eq!((b0 - b1).norm(), 0.0);
            }
        }
        assert!(s.subdomain_gather(&part, 99).is_err());
    }

    #[test]
    fn indicator_restriction_matches_membership() {
        let mesh = Arc::new(build_cartesian(4, 4, Box2::unit()).unwrap());
        let part = agglomerate(&mesh, 2, 2).unwrap();
        let s = HybridSpace::new(mesh, 0, 0).unwrap();
        // cell data = 1 on subdomain 3, else 0 (faces left zero)
        let mut v = HybridVector::zeros(&s);
        for &c in part.cells_of(3) {
            v.data[s.cell_dof_range(c).start] = 1.0;
        }
        let g = s.subdomain_gather(&part, 3).unwrap();
        let local = s.restrict_to_subdomain(&g, &v);
        for (lc, _) in g.cells.iter().enumerate() {
            assert_relative_eq!(local[lc], 1.0);
        }
        let g0 = s.subdomain_gather(&part, 0).unwrap();
        let local0 = s.restrict_to_subdomain(&g0, &v);
        for (lc, _) in g0.cells.iter().enumerate() {
            assert_relative_eq!(local0[lc], 0.0);
        }
    }
}
