//! Discrete `H^1` and boundary `H^{1/2}` seminorms, the boundary mean
//! vector and the truncation operator.
//!
//! The boundary seminorm combines a per-face fluctuation term, weighted by
//! the inverse face diameter, with a mean-difference term over all ordered
//! pairs of distinct boundary faces, weighted by face measures and the
//! inverse squared centroid distance. Its Gram matrix is assembled densely
//! over the boundary blocks; in 2D the boundary DOF count stays small.

use crate::error::{Error, Result};
use crate::linalg;
use crate::space::{BoundaryFunction, HybridSpace, HybridVector};
use crate::sparse::{CsrMatrix, SpdSolver};
use nalgebra::{DMatrix, DVector};

/// Discrete `H^1` seminorm of a hybrid vector over the given cells:
/// `[sum_t (||grad v_t||^2 + sum_f h_t^{-1} ||v_f - v_t||^2_f)]^{1/2}`.
pub fn h1_seminorm_cells(space: &HybridSpace, v: &HybridVector, cells: &[usize]) -> f64 {
    let mesh = space.mesh();
    let cs = space.cell_block_size();
    let fs = space.face_block_size();
    let mut acc = 0.0;
    for &c in cells {
        let cell_coeffs = v.data.rows(space.cell_dof_range(c).start, cs).clone_owned();
        let quad = space.cell_quad(c);
        for (&x, &w) in quad.points.iter().zip(&quad.weights) {
            let (gx, gy) = space.cell_basis(c).eval_grad(x);
            let dx = gx.dot(&cell_coeffs);
            let dy = gy.dot(&cell_coeffs);
            acc += w * (dx * dx + dy * dy);
        }
        let ht_inv = 1.0 / mesh.cell_diameter(c);
        for &f in mesh.cell_faces(c) {
            let face_coeffs = v.data.rows(space.face_dof_range(f).start, fs).clone_owned();
            let fq = space.face_quad(f);
            acc += ht_inv
                * fq.integrate(|x| {
                    let vf = space.face_basis(f).eval(x).dot(&face_coeffs);
                    let vt = space.cell_basis(c).eval(x).dot(&cell_coeffs);
                    (vf - vt) * (vf - vt)
                });
        }
    }
    acc.sqrt()
}

/// Discrete `H^1` seminorm over the whole mesh.
pub fn h1_seminorm(space: &HybridSpace, v: &HybridVector) -> f64 {
    let cells: Vec<usize> = (0..space.mesh().n_cells()).collect();
    h1_seminorm_cells(space, v, &cells)
}

/// A face-aligned portion of the domain boundary.
#[derive(Clone, Debug)]
pub struct BoundaryRegion {
    faces: Vec<usize>,
    measure: f64,
}

/// Sides of an axis-aligned box domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl BoundaryRegion {
    /// Region from an explicit set of boundary faces.
    pub fn new(space: &HybridSpace, mut faces: Vec<usize>) -> Result<Self> {
        faces.sort_unstable();
        faces.dedup();
        if faces.is_empty() {
            return Err(Error::invalid("boundary region must be nonempty"));
        }
        for &f in &faces {
            if space.boundary_block_of_face(f).is_none() {
                return Err(Error::invalid(format!("face {f} is not a boundary face")));
            }
        }
        let measure = faces.iter().map(|&f| space.mesh().face_length(f)).sum();
        Ok(Self { faces, measure })
    }

    /// The whole boundary.
    pub fn whole_boundary(space: &HybridSpace) -> Result<Self> {
        Self::new(space, space.boundary_faces().to_vec())
    }

    /// Union of box sides (for box domains).
    pub fn sides(space: &HybridSpace, sides: &[Side]) -> Result<Self> {
        let domain = space.mesh().domain();
        let tol = 1e-9 * space.mesh().mesh_size();
        let faces = space
            .boundary_faces()
            .iter()
            .copied()
            .filter(|&f| {
                let c = space.mesh().face_centroid(f);
                sides.iter().any(|s| match s {
                    Side::Bottom => (c.y - domain.y0).abs() < tol,
                    Side::Top => (c.y - domain.y1).abs() < tol,
                    Side::Left => (c.x - domain.x0).abs() < tol,
                    Side::Right => (c.x - domain.x1).abs() < tol,
                })
            })
            .collect();
        Self::new(space, faces)
    }

    pub fn faces(&self) -> &[usize] {
        &self.faces
    }

    /// 1D measure of the region.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn contains(&self, face: usize) -> bool {
        self.faces.binary_search(&face).is_ok()
    }
}

/// Gram matrix of the discrete `H^{1/2}` boundary seminorm.
pub struct HhalfGram {
    matrix: DMatrix<f64>,
    n_boundary_faces: usize,
}

impl HhalfGram {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Number of ordered distinct boundary-face pairs in the mean-difference
    /// sum.
    pub fn ordered_pair_count(&self) -> usize {
        self.n_boundary_faces * (self.n_boundary_faces - 1)
    }

    /// Quadratic form value `w^T H w`.
    pub fn form(&self, w: &BoundaryFunction) -> f64 {
        (&self.matrix * &w.data).dot(&w.data)
    }
}

/// Assemble the `H^{1/2}` Gram matrix over the boundary DOFs.
///
/// Ordered pairs are accumulated as twice the unordered sum. Coincident face
/// centroids are a fatal mesh error.
pub fn hhalf_gram(space: &HybridSpace) -> Result<HhalfGram> {
    let mesh = space.mesh();
    let bnd = space.boundary_faces();
    let fs = space.face_block_size();
    let n = space.n_boundary_dofs();
    let mut h = DMatrix::zeros(n, n);

    // per-face fluctuation term h_f^{-1} (M_f - m_f m_f^T / |f|)
    let mut mean_vec: Vec<DVector<f64>> = Vec::with_capacity(bnd.len());
    for (b, &f) in bnd.iter().enumerate() {
        let mass = space.face_mass(f);
        let m = space
            .face_quad(f)
            .integrate_vector(|x| space.face_basis(f).eval(x));
        let len = mesh.face_length(f);
        let block = (mass - &m * m.transpose() / len) / mesh.face_diameter(f);
        let r = space.boundary_dof_range(b);
        h.view_mut((r.start, r.start), (fs, fs)).add_assign_local(&block);
        mean_vec.push(m / len);
    }

    // mean-difference term over ordered pairs (twice the unordered sum)
    for bi in 0..bnd.len() {
        for bj in (bi + 1)..bnd.len() {
            let (fi, fj) = (bnd[bi], bnd[bj]);
            let d = (mesh.face_centroid(fi) - mesh.face_centroid(fj)).norm_squared();
            if d == 0.0 {
                return Err(Error::Mesh(format!(
                    "boundary faces {fi} and {fj} have coincident centroids"
                )));
            }
            let coeff = 2.0 * mesh.face_length(fi) * mesh.face_length(fj) / d;
            let (ui, uj) = (&mean_vec[bi], &mean_vec[bj]);
            let (ri, rj) = (space.boundary_dof_range(bi), space.boundary_dof_range(bj));
            for a in 0..fs {
                for b in 0..fs {
                    h[(ri.start + a, ri.start + b)] += coeff * ui[a] * ui[b];
                    h[(rj.start + a, rj.start + b)] += coeff * uj[a] * uj[b];
                    h[(ri.start + a, rj.start + b)] -= coeff * ui[a] * uj[b];
                    h[(rj.start + a, ri.start + b)] -= coeff * uj[a] * ui[b];
                }
            }
        }
    }
    linalg::symmetrize(&mut h);
    Ok(HhalfGram {
        matrix: h,
        n_boundary_faces: bnd.len(),
    })
}

/// Row vector `S_Gamma` with `(S_Gamma)_a = int_Gamma phi_a`, as a column.
pub fn boundary_mean_vector(space: &HybridSpace, region: &BoundaryRegion) -> DVector<f64> {
    let mut s = DVector::zeros(space.n_boundary_dofs());
    for &f in region.faces() {
        let b = space.boundary_block_of_face(f).expect("validated region");
        let m = space
            .face_quad(f)
            .integrate_vector(|x| space.face_basis(f).eval(x));
        s.rows_mut(space.boundary_dof_range(b).start, space.face_block_size())
            .copy_from(&m);
    }
    s
}

/// 0/1 diagonal mask of the truncation operator `R_Gamma`.
pub fn truncation_mask(space: &HybridSpace, region: &BoundaryRegion) -> DVector<f64> {
    let mut mask = DVector::zeros(space.n_boundary_dofs());
    for &f in region.faces() {
        let b = space.boundary_block_of_face(f).expect("validated region");
        mask.rows_mut(space.boundary_dof_range(b).start, space.face_block_size())
            .fill(1.0);
    }
    mask
}

/// Truncate a boundary function: keep blocks on `Gamma`, zero the rest.
pub fn truncate(
    space: &HybridSpace,
    region: &BoundaryRegion,
    w: &BoundaryFunction,
) -> BoundaryFunction {
    let mask = truncation_mask(space, region);
    BoundaryFunction {
        data: w.data.component_mul(&mask),
    }
}

/// `H^{1/2}` seminorm `(w^T H w)^{1/2}`; tiny negative round-off is clamped,
/// larger negative values indicate an assembly bug.
pub fn hhalf_seminorm(gram: &HhalfGram, w: &BoundaryFunction) -> Result<f64> {
    let q = gram.form(w);
    if q < -1e-12 * (1.0 + w.data.norm_squared()) {
        return Err(Error::Linalg(format!(
            "H^1/2 form returned a significantly negative value {q:.3e}"
        )));
    }
    Ok(q.max(0.0).sqrt())
}

/// Gram matrix over boundary DOFs of the minimal-`H^1` extension energy:
/// `w -> min { |v|_{1,h}^2 : trace(v) = w }`.
///
/// Cell blocks are eliminated cell by cell, interior faces by a sparse
/// factorization; the result is the Schur complement on boundary blocks.
pub fn h1_boundary_schur(space: &HybridSpace) -> Result<DMatrix<f64>> {
    let mesh = space.mesh();
    let fs = space.face_block_size();

    // condensed (cells eliminated) H1 Gram on face DOFs
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for c in 0..mesh.n_cells() {
        let local = h1_local_matrix(space, c);
        let faces = mesh.cell_faces(c);
        let cs = space.cell_block_size();
        let nf = faces.len() * fs;
        let a_tt = local.view((0, 0), (cs, cs)).clone_owned();
        let a_tf = local.view((0, cs), (cs, nf)).clone_owned();
        let a_ff = local.view((cs, cs), (nf, nf)).clone_owned();
        let chol = a_tt
            .cholesky()
            .ok_or_else(|| Error::Linalg("H1 local cell block not SPD".into()))?;
        let cond = &a_ff - a_tf.transpose() * chol.solve(&a_tf);
        for (li, &fi) in faces.iter().enumerate() {
            for (lj, &fj) in faces.iter().enumerate() {
                let (ri, rj) = (fi * fs, fj * fs);
                for a in 0..fs {
                    for b in 0..fs {
                        triplets.push((ri + a, rj + b, cond[(li * fs + a, lj * fs + b)]));
                    }
                }
            }
        }
    }

    // interior / boundary split of face DOFs
    let n_faces = mesh.n_faces();
    let mut face_kind = vec![usize::MAX; n_faces]; // index within its class
    let mut interior_faces = Vec::new();
    for f in 0..n_faces {
        if mesh.face(f).is_boundary() {
            face_kind[f] = space.boundary_block_of_face(f).unwrap();
        } else {
            face_kind[f] = interior_faces.len();
            interior_faces.push(f);
        }
    }
    let n_i = interior_faces.len() * fs;
    let n_b = space.n_boundary_dofs();
    let mut t_ii = Vec::new();
    let mut a_ib = DMatrix::zeros(n_i, n_b);
    let mut a_bb = DMatrix::zeros(n_b, n_b);
    for (r, c, v) in triplets {
        let (fr, fc) = (r / fs, c / fs);
        let (ar, ac) = (r % fs, c % fs);
        let r_bnd = mesh.face(fr).is_boundary();
        let c_bnd = mesh.face(fc).is_boundary();
        match (r_bnd, c_bnd) {
            (false, false) => t_ii.push((face_kind[fr] * fs + ar, face_kind[fc] * fs + ac, v)),
            (false, true) => a_ib[(face_kind[fr] * fs + ar, face_kind[fc] * fs + ac)] += v,
            (true, false) => {} // symmetric counterpart of (false, true)
            (true, true) => a_bb[(face_kind[fr] * fs + ar, face_kind[fc] * fs + ac)] += v,
        }
    }
    let a_ii = CsrMatrix::from_triplets(n_i, n_i, t_ii);
    let solver = SpdSolver::new(&a_ii)?;
    let mut schur = a_bb;
    for col in 0..n_b {
        let rhs = a_ib.column(col).clone_owned();
        let x = solver.solve(&rhs);
        for row in 0..n_b {
            let mut dot = 0.0;
            for i in 0..n_i {
                dot += a_ib[(i, row)] * x[i];
            }
            schur[(row, col)] -= dot;
        }
    }
    linalg::symmetrize(&mut schur);
    Ok(schur)
}

/// Local `H^1` seminorm matrix of one cell over `[cell | its faces]` blocks.
pub fn h1_local_matrix(space: &HybridSpace, c: usize) -> DMatrix<f64> {
    let mesh = space.mesh();
    let cs = space.cell_block_size();
    let fs = space.face_block_size();
    let faces = mesh.cell_faces(c);
    let n = cs + faces.len() * fs;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (cs, cs))
        .add_assign_local(&crate::basis::stiffness_matrix(space.cell_quad(c), space.cell_basis(c)));
    let ht_inv = 1.0 / mesh.cell_diameter(c);
    for (lf, &f) in faces.iter().enumerate() {
        let fq = space.face_quad(f);
        let p = crate::basis::gram(fq, |x| space.cell_basis(c).eval(x), |x| {
            space.cell_basis(c).eval(x)
        });
        let nmix = crate::basis::gram(fq, |x| space.face_basis(f).eval(x), |x| {
            space.cell_basis(c).eval(x)
        });
        let m = space.face_mass(f);
        let off = cs + lf * fs;
        a.view_mut((0, 0), (cs, cs)).add_assign_local(&(&p * ht_inv));
        a.view_mut((off, off), (fs, fs)).add_assign_local(&(m * ht_inv));
        a.view_mut((off, 0), (fs, cs)).add_assign_local(&(&nmix * -ht_inv));
        a.view_mut((0, off), (cs, fs))
            .add_assign_local(&(nmix.transpose() * -ht_inv));
    }
    a
}

/// Largest trace and lifting Rayleigh quotients of the current mesh/degree:
/// `max_w |w|_{1/2,h}^2 / S_H(w)` and `max_w S_H(w) / |w|_{1/2,h}^2`, both
/// over boundary data orthogonal to the constant.
pub fn trace_and_lifting_ratios(space: &HybridSpace) -> Result<(f64, f64)> {
    let gram = hhalf_gram(space)?;
    let schur = h1_boundary_schur(space)?;
    let ones = space.boundary_constant()?;
    let u = linalg::complement_basis(&ones.data);
    let h_r = u.transpose() * gram.matrix() * &u;
    let s_r = u.transpose() * &schur * &u;
    let trace = linalg::max_generalized_eigenvalue(&h_r, &s_r)?;
    let lift = linalg::max_generalized_eigenvalue(&s_r, &h_r)?;
    Ok((trace, lift))
}

trait AddAssignLocal {
    fn add_assign_local(&mut self, other: &DMatrix<f64>);
}

impl AddAssignLocal for nalgebra::DMatrixViewMut<'_, f64> {
    fn add_assign_local(&mut self, other: &DMatrix<f64>) {
        debug_assert_eq!(self.nrows(), other.nrows());
        debug_assert_eq!(self.ncols(), other.ncols());
        for j in 0..other.ncols() {
            for i in 0..other.nrows() {
                self[(i, j)] += other[(i, j)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Box2, Point2};
    use crate::mesh::build_cartesian;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn space(n: usize, k: usize) -> HybridSpace {
        let mesh = Arc::new(build_cartesian(n, n, Box2::unit()).unwrap());
        HybridSpace::new(mesh, k, k).unwrap()
    }

    #[test]
    fn h1_seminorm_vanishes_on_constants() {
        let s = space(4, 1);
        let v = s.interpolate(|_| 3.7).unwrap();
        assert!(h1_seminorm(&s, &v) < 1e-13);
    }

    #[test]
    fn h1_seminorm_exact_for_linears() {
        let s = space(4, 1);
        let v = s.interpolate(|p| p.x).unwrap();
        // jump terms vanish, |v|_{1,h} = ||grad x||_{L2} = 1
        assert_relative_eq!(h1_seminorm(&s, &v), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn h1_seminorm_approximates_smooth_gradient_norm() {
        let s = space(16, 1);
        let g = |p: Point2| (2.0 * std::f64::consts::PI * p.x).sin();
        let v = s.interpolate(g).unwrap();
        let exact = 2f64.sqrt() * std::f64::consts::PI; // ||grad g||_{L2}
        let got = h1_seminorm(&s, &v);
        assert!(
            (got - exact).abs() / exact < 0.05,
            "got {got}, expected about {exact}"
        );
    }

    #[test]
    fn h1_subdomain_energies_sum_to_global() {
        let mesh = Arc::new(build_cartesian(8, 8, Box2::unit()).unwrap());
        let part = crate::mesh::agglomerate(&mesh, 2, 2).unwrap();
        let s = HybridSpace::new(mesh, 1, 1).unwrap();
        let v = s
            .interpolate(|p| (p.x * 2.1).sin() * (p.y * 1.3 + 0.2).cos())
            .unwrap();
        let global = h1_seminorm(&s, &v).powi(2);
        let sum: f64 = (0..part.n_subdomains())
            .map(|t| h1_seminorm_cells(&s, &v, part.cells_of(t)).powi(2))
            .sum();
        assert_relative_eq!(global, sum, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn hhalf_form_vanishes_exactly_on_constants() {
        for k in [0usize, 2] {
            let s = space(4, k);
            let gram = hhalf_gram(&s).unwrap();
            let ones = s.boundary_constant().unwrap();
            let w = BoundaryFunction {
                data: ones.data * 2.5,
            };
            let q = gram.form(&w);
            assert!(q.abs() < 1e-12, "constant form value {q}");
            // the square root amplifies the O(1e-13) round-off of the form
            assert_relative_eq!(hhalf_seminorm(&gram, &w).unwrap(), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn hhalf_matches_double_loop_oracle_on_random_data() {
        // independent brute-force evaluation of the seminorm definition
        let s = space(8, 1);
        let gram = hhalf_gram(&s).unwrap();
        let mesh = s.mesh();
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut rng = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let data = DVector::from_fn(s.n_boundary_dofs(), |_, _| rng());
        let w = BoundaryFunction { data };

        let bnd = s.boundary_faces();
        let mut oracle = 0.0;
        // fluctuation terms
        for (b, &f) in bnd.iter().enumerate() {
            let coeffs = w
                .data
                .rows(s.boundary_dof_range(b).start, s.face_block_size())
                .clone_owned();
            let fq = s.face_quad(f);
            let mean = fq.integrate(|x| s.face_basis(f).eval(x).dot(&coeffs))
                / mesh.face_length(f);
            oracle += fq.integrate(|x| {
                let d = s.face_basis(f).eval(x).dot(&coeffs) - mean;
                d * d
            }) / mesh.face_diameter(f);
        }
        // ordered pair terms
        for (bi, &fi) in bnd.iter().enumerate() {
            for (bj, &fj) in bnd.iter().enumerate() {
                if bi == bj {
                    continue;
                }
                let ci = w
                    .data
                    .rows(s.boundary_dof_range(bi).start, s.face_block_size())
                    .clone_owned();
                let cj = w
                    .data
                    .rows(s.boundary_dof_range(bj).start, s.face_block_size())
                    .clone_owned();
                let mi = s.face_quad(fi).integrate(|x| s.face_basis(fi).eval(x).dot(&ci))
                    / mesh.face_length(fi);
                let mj = s.face_quad(fj).integrate(|x| s.face_basis(fj).eval(x).dot(&cj))
                    / mesh.face_length(fj);
                let dist2 = (mesh.face_centroid(fi) - mesh.face_centroid(fj)).norm_squared();
                oracle += mesh.face_length(fi) * mesh.face_length(fj) * (mi - mj) * (mi - mj)
                    / dist2;
            }
        }
        assert_relative_eq!(gram.form(&w), oracle, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn hhalf_single_pair_value() {
        // 1x1 mesh, k = 0: four boundary faces; put 1 on one face and check
        // against the direct evaluation of the pair sum
        let s = space(1, 0);
        let gram = hhalf_gram(&s).unwrap();
        let mesh = s.mesh();
        let bnd = s.boundary_faces();
        let mut data = DVector::zeros(4);
        data[0] = 1.0;
        let w = BoundaryFunction { data };
        // oracle: means are (1, 0, 0, 0); fluctuations vanish for k = 0
        let mut expect = 0.0;
        for &fj in bnd.iter().skip(1) {
            let f0 = bnd[0];
            let d2 = (mesh.face_centroid(f0) - mesh.face_centroid(fj)).norm_squared();
            expect += 2.0 * mesh.face_length(f0) * mesh.face_length(fj) / d2;
        }
        assert_relative_eq!(gram.form(&w), expect, epsilon = 1e-13);
    }

    #[test]
    fn hhalf_kernel_is_one_dimensional() {
        for k in [0usize, 1] {
            let s = space(6, k);
            let gram = hhalf_gram(&s).unwrap();
            let eigs = linalg::sym_eigenvalues(gram.matrix()).unwrap();
            let lmax = *eigs.last().unwrap();
            let near_zero = eigs.iter().filter(|&&e| e <= 1e-12 * lmax).count();
            assert_eq!(near_zero, 1, "k = {k}: kernel must be the constants");
        }
    }

    #[test]
    fn mean_vector_and_truncation() {
        let s = space(4, 1);
        let top = BoundaryRegion::sides(&s, &[Side::Top]).unwrap();
        assert_eq!(top.faces().len(), 4);
        assert_relative_eq!(top.measure(), 1.0, epsilon = 1e-13);

        let sv = boundary_mean_vector(&s, &top);
        let ones = s.boundary_constant().unwrap();
        assert_relative_eq!(sv.dot(&ones.data), 1.0, epsilon = 1e-12);

        // odd function about the midpoint of the top side integrates to zero
        let v = s.interpolate(|p| p.x - 0.5).unwrap();
        let w = s.trace(&v);
        assert_relative_eq!(sv.dot(&w.data), 0.0, epsilon = 1e-12);

        // quadrature oracle on a generic function
        let v = s.interpolate(|p| (1.3 * p.x + 0.4).sin() + p.y).unwrap();
        let w = s.trace(&v);
        let mut oracle = 0.0;
        for &f in top.faces() {
            let b = s.boundary_block_of_face(f).unwrap();
            let coeffs = w
                .data
                .rows(s.boundary_dof_range(b).start, s.face_block_size())
                .clone_owned();
            oracle += s
                .face_quad(f)
                .integrate(|x| s.face_basis(f).eval(x).dot(&coeffs));
        }
        assert_relative_eq!(sv.dot(&w.data), oracle, epsilon = 1e-13);

        // truncation zeroes everything off Gamma and is a projector
        let r = truncate(&s, &top, &w);
        let rr = truncate(&s, &top, &r);
        assert_relative_eq!((&r.data - &rr.data).norm(), 0.0);
        let all = BoundaryRegion::whole_boundary(&s).unwrap();
        let id = truncate(&s, &all, &w);
        assert_relative_eq!((&id.data - &w.data).norm(), 0.0);

        // w = 1 truncated to the top side of a 4x4 mesh: 4 faces keep the
        // constant, 12 are zeroed
        let r1 = truncate(&s, &top, &ones);
        let kept: usize = s
            .boundary_faces()
            .iter()
            .enumerate()
            .filter(|&(b, _)| {
                r1.data
                    .rows(s.boundary_dof_range(b).start, s.face_block_size())
                    .norm()
                    > 0.0
            })
            .count();
        assert_eq!(kept, 4);
    }

    #[test]
    fn trace_and_lifting_ratios_are_order_one() {
        let s = space(8, 1);
        let (trace, lift) = trace_and_lifting_ratios(&s).unwrap();
        assert!(trace > 0.0 && trace.is_finite());
        assert!(lift > 0.0 && lift.is_finite());
        // the two pencils are inverses of each other on the deflated space,
        // so the product of extremes is at least 1
        assert!(trace * lift >= 1.0 - 1e-10);
    }
}
