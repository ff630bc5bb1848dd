//! Discontinuous skeletal discretisations of the Poisson problem.
//!
//! All four methods fit one template: a cell-local flux or potential
//! reconstruction drives the consistency part of the bilinear form, a
//! symmetric positive semidefinite penalty stabilises it, and the cell
//! unknowns are eliminated cell by cell (static condensation), leaving an
//! SPD system on the face unknowns with homogeneous Dirichlet blocks removed.
//!
//! - HDG: flux in `[P_k]^2` from the mixed local problem, penalty
//!   `tau int_dt (u - u_hat)(v - v_hat)` with `tau = 1`;
//! - HDG+: cell space raised to `P_{k+1}`, jumps projected onto the face
//!   space, `tau = 1/h_t`;
//! - HHO: potential reconstruction in `P_{k+1}` with mean-value closure and
//!   the classical difference-operator stabiliser weighted by `1/h_f`;
//! - mixed-order HHO: cell space `P_{k+1}`, same reconstruction, projected
//!   jump penalty weighted by `1/h_t`.
//!
//! Local layout per cell everywhere in this module: the cell block first,
//! then the face blocks in cell-loop order.

use crate::basis::{self, CellBasis};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::krylov;
use crate::linalg;
use crate::space::{HybridSpace, HybridVector};
use crate::sparse::CsrMatrix;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// The four discontinuous skeletal methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Hdg,
    HdgPlus,
    Hho,
    HhoMixed,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Hdg => "hdg",
            Method::HdgPlus => "hdg+",
            Method::Hho => "hho",
            Method::HhoMixed => "hho-mixed",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "hdg" => Some(Method::Hdg),
            "hdg+" | "hdgplus" | "hdg-plus" => Some(Method::HdgPlus),
            "hho" => Some(Method::Hho),
            "hho-mixed" | "hhomixed" | "mixed" => Some(Method::HhoMixed),
            _ => None,
        }
    }
}

/// Method plus face degree; fixes the cell degree and the penalty rule.
#[derive(Clone, Copy, Debug)]
pub struct MethodConfig {
    pub method: Method,
    pub face_degree: usize,
}

impl MethodConfig {
    pub fn new(method: Method, face_degree: usize) -> Self {
        Self {
            method,
            face_degree,
        }
    }

    /// Cell degree: `k` for HDG/HHO, `k + 1` for HDG+/mixed-order HHO.
    pub fn cell_degree(&self) -> usize {
        match self.method {
            Method::Hdg | Method::Hho => self.face_degree,
            Method::HdgPlus | Method::HhoMixed => self.face_degree + 1,
        }
    }

    /// Penalty factor for the jump stabilisers.
    pub fn penalty(&self, h_t: f64) -> f64 {
        match self.method {
            Method::Hdg => 1.0,
            Method::HdgPlus | Method::HhoMixed => 1.0 / h_t,
            Method::Hho => f64::NAN, // HHO weights per face inside the stabiliser
        }
    }

    /// Build the hybrid space this method discretises on.
    pub fn make_space(&self, mesh: Arc<crate::mesh::PolytopalMesh>) -> Result<HybridSpace> {
        HybridSpace::new(mesh, self.cell_degree(), self.face_degree)
    }
}

/// Reconstruction data of one cell.
pub enum Reconstruction {
    /// HDG-type flux in `[P_k]^2`: coefficient map (x block above y block)
    /// and the scalar flux basis.
    Flux { map: DMatrix<f64>, basis: CellBasis },
    /// HHO-type potential in `P_{k+1}`: coefficient map and basis.
    Potential { map: DMatrix<f64>, basis: CellBasis },
}

/// Local bilinear-form pieces of one cell over `[cell | faces]` blocks.
pub struct CellOperators {
    /// Consistency part (flux or reconstructed-gradient Gram).
    pub energy: DMatrix<f64>,
    /// Stabilisation part; symmetric positive semidefinite.
    pub stab: DMatrix<f64>,
    pub reconstruction: Reconstruction,
    n_local: usize,
}

impl CellOperators {
    /// Full local bilinear form `energy + stab`.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        &self.energy + &self.stab
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    /// Stabilisation value `s(u, v)` on local hybrid data.
    pub fn stabilisation(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (&self.stab * v).dot(u)
    }
}

/// Assemble the local operators of cell `c`.
pub fn cell_operators(space: &HybridSpace, config: &MethodConfig, c: usize) -> Result<CellOperators> {
    if space.cell_degree() != config.cell_degree() || space.face_degree() != config.face_degree {
        return Err(Error::invalid(
            "hybrid space degrees do not match the method configuration",
        ));
    }
    match config.method {
        Method::Hdg | Method::HdgPlus => hdg_operators(space, config, c),
        Method::Hho | Method::HhoMixed => hho_operators(space, config, c),
    }
}

fn local_sizes(space: &HybridSpace, c: usize) -> (usize, usize, usize) {
    let cs = space.cell_block_size();
    let fs = space.face_block_size();
    let nf = space.mesh().cell_faces(c).len();
    (cs, fs, cs + nf * fs)
}

/// Face-block projection matrices `M_f^{-1} N_f` of the cell trace onto each
/// face space, and the raw couplings `N_f[a, i] = int_f psi_a phi_i`.
fn trace_projections(
    space: &HybridSpace,
    c: usize,
    cell_eval: &dyn Fn(Point2) -> DVector<f64>,
) -> Result<Vec<(DMatrix<f64>, DMatrix<f64>)>> {
    let mesh = space.mesh();
    let mut out = Vec::with_capacity(mesh.cell_faces(c).len());
    for &f in mesh.cell_faces(c) {
        let n = basis::gram(space.face_quad(f), |x| space.face_basis(f).eval(x), cell_eval);
        let chol = space
            .face_mass(f)
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Linalg("face mass matrix not SPD".into()))?;
        let proj = chol.solve(&n);
        out.push((proj, n));
    }
    Ok(out)
}

/// HDG and HDG+ local operators: mixed flux reconstruction plus jump penalty.
fn hdg_operators(space: &HybridSpace, config: &MethodConfig, c: usize) -> Result<CellOperators> {
    let mesh = space.mesh();
    let (cs, fs, n_local) = local_sizes(space, c);
    let faces = mesh.cell_faces(c);
    let quad = space.cell_quad(c);
    let k = config.face_degree;

    // flux lives in [P_k]^2 regardless of the cell degree
    let flux_basis = CellBasis::new(mesh.cell_centroid(c), mesh.cell_diameter(c), k);
    let dk = flux_basis.dim();
    let m_k = basis::mass_matrix(quad, |x| flux_basis.eval(x));
    let chol_mk = m_k
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Linalg("flux mass matrix not SPD".into()))?;

    // right-hand sides of the flux equation M q = G u - sum_f T_f u_f,
    // componentwise: G[(comp, i), j] = int u_j d_comp(phi_i)
    let mut rhs_x = DMatrix::zeros(dk, n_local);
    let mut rhs_y = DMatrix::zeros(dk, n_local);
    for (&x, &w) in quad.points.iter().zip(&quad.weights) {
        let u = space.cell_basis(c).eval(x);
        let (gx, gy) = flux_basis.eval_grad(x);
        for i in 0..dk {
            for j in 0..cs {
                rhs_x[(i, j)] += w * u[j] * gx[i];
                rhs_y[(i, j)] += w * u[j] * gy[i];
            }
        }
    }
    for (lf, &f) in faces.iter().enumerate() {
        let nrm = mesh.outward_normal(f, c);
        let t = basis::gram(space.face_quad(f), |x| flux_basis.eval(x), |x| {
            space.face_basis(f).eval(x)
        });
        let off = cs + lf * fs;
        for i in 0..dk {
            for a in 0..fs {
                rhs_x[(i, off + a)] -= nrm.x * t[(i, a)];
                rhs_y[(i, off + a)] -= nrm.y * t[(i, a)];
            }
        }
    }
    let qx = chol_mk.solve(&rhs_x);
    let qy = chol_mk.solve(&rhs_y);

    // energy = q^T M q, accumulated per component
    let mut energy = qx.transpose() * &m_k * &qx;
    energy += qy.transpose() * &m_k * &qy;

    // penalty tau sum_f int_f (Pi_f u - u_f)(Pi_f v - v_f); for equal-order
    // HDG the projection is the exact trace
    let tau = config.penalty(mesh.cell_diameter(c));
    let mut stab = DMatrix::zeros(n_local, n_local);
    let cell_eval = |x: Point2| space.cell_basis(c).eval(x);
    let projections = trace_projections(space, c, &cell_eval)?;
    for (lf, &f) in faces.iter().enumerate() {
        let (proj, _) = &projections[lf];
        let mut jump = DMatrix::zeros(fs, n_local);
        jump.view_mut((0, 0), (fs, cs)).copy_from(proj);
        let off = cs + lf * fs;
        for a in 0..fs {
            jump[(a, off + a)] -= 1.0;
        }
        stab += jump.transpose() * space.face_mass(f) * jump * tau;
    }

    let mut map = DMatrix::zeros(2 * dk, n_local);
    map.view_mut((0, 0), (dk, n_local)).copy_from(&qx);
    map.view_mut((dk, 0), (dk, n_local)).copy_from(&qy);
    Ok(CellOperators {
        energy,
        stab,
        reconstruction: Reconstruction::Flux {
            map,
            basis: flux_basis,
        },
        n_local,
    })
}

/// HHO and mixed-order HHO local operators: potential reconstruction in
/// `P_{k+1}` plus the method-specific stabiliser.
fn hho_operators(space: &HybridSpace, config: &MethodConfig, c: usize) -> Result<CellOperators> {
    let mesh = space.mesh();
    let (cs, fs, n_local) = local_sizes(space, c);
    let faces = mesh.cell_faces(c);
    let quad = space.cell_quad(c);
    let k = config.face_degree;

    let recon_basis = CellBasis::new(mesh.cell_centroid(c), mesh.cell_diameter(c), k + 1);
    let dr = recon_basis.dim();
    let stiff = basis::stiffness_matrix(quad, &recon_basis);

    // (grad p, grad w) = (grad u_t, grad w) + sum_f <u_f - u_t, grad w . n>
    let mut rhs = DMatrix::zeros(dr, n_local);
    for (&x, &w) in quad.points.iter().zip(&quad.weights) {
        let (rgx, rgy) = recon_basis.eval_grad(x);
        let (cgx, cgy) = space.cell_basis(c).eval_grad(x);
        for i in 0..dr {
            for j in 0..cs {
                rhs[(i, j)] += w * (rgx[i] * cgx[j] + rgy[i] * cgy[j]);
            }
        }
    }
    for (lf, &f) in faces.iter().enumerate() {
        let nrm = mesh.outward_normal(f, c);
        let fq = space.face_quad(f);
        for (&x, &w) in fq.points.iter().zip(&fq.weights) {
            let (rgx, rgy) = recon_basis.eval_grad(x);
            let cell_vals = space.cell_basis(c).eval(x);
            let face_vals = space.face_basis(f).eval(x);
            let off = cs + lf * fs;
            for i in 0..dr {
                let dn = rgx[i] * nrm.x + rgy[i] * nrm.y;
                for j in 0..cs {
                    rhs[(i, j)] -= w * dn * cell_vals[j];
                }
                for a in 0..fs {
                    rhs[(i, off + a)] += w * dn * face_vals[a];
                }
            }
        }
    }
    // close the constant mode with the cell-mean condition int p = int u_t
    let mut sys = stiff.clone();
    let m_recon = quad.integrate_vector(|x| recon_basis.eval(x));
    let m_cell = quad.integrate_vector(|x| space.cell_basis(c).eval(x));
    for j in 0..dr {
        sys[(0, j)] = m_recon[j];
    }
    for j in 0..n_local {
        rhs[(0, j)] = if j < cs { m_cell[j] } else { 0.0 };
    }
    let lu = sys.lu();
    let recon_map = lu.solve(&rhs).ok_or_else(|| {
        Error::Linalg("potential reconstruction is rank deficient beyond the constants".into())
    })?;

    let energy = recon_map.transpose() * &stiff * &recon_map;

    // stabilisers
    let mut stab = DMatrix::zeros(n_local, n_local);
    let cell_eval = |x: Point2| space.cell_basis(c).eval(x);
    let projections = trace_projections(space, c, &cell_eval)?;
    match config.method {
        Method::HhoMixed => {
            // h_t^{-1} sum_f int_f Pi_f(u_t - u_f) Pi_f(v_t - v_f)
            let tau = config.penalty(mesh.cell_diameter(c));
            for (lf, &f) in faces.iter().enumerate() {
                let (proj, _) = &projections[lf];
                let mut jump = DMatrix::zeros(fs, n_local);
                jump.view_mut((0, 0), (fs, cs)).copy_from(proj);
                let off = cs + lf * fs;
                for a in 0..fs {
                    jump[(a, off + a)] -= 1.0;
                }
                stab += jump.transpose() * space.face_mass(f) * jump * tau;
            }
        }
        Method::Hho => {
            // classical difference stabiliser:
            // sum_f h_f^{-1} || Pi_f(delta_F - delta_T|_f) ||_f^2 with
            // delta_T = Pi_T(p) - u_t and delta_F = Pi_f(p) - u_f
            let chol_mc = space
                .cell_mass(c)
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Linalg("cell mass matrix not SPD".into()))?;
            // Pi_T on the reconstruction basis
            let n_cr = basis::gram(quad, &cell_eval, |x| recon_basis.eval(x));
            let proj_cell = chol_mc.solve(&n_cr); // cs x dr
            let mut delta_t = &proj_cell * &recon_map; // cs x n_local
            for j in 0..cs {
                delta_t[(j, j)] -= 1.0;
            }
            for (lf, &f) in faces.iter().enumerate() {
                let (proj_trace, _) = &projections[lf];
                // Pi_f on the reconstruction basis
                let n_fr = basis::gram(space.face_quad(f), |x| space.face_basis(f).eval(x), |x| {
                    recon_basis.eval(x)
                });
                let chol_mf = space
                    .face_mass(f)
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Linalg("face mass matrix not SPD".into()))?;
                let proj_face = chol_mf.solve(&n_fr); // fs x dr
                let mut delta_f = &proj_face * &recon_map; // fs x n_local
                let off = cs + lf * fs;
                for a in 0..fs {
                    delta_f[(a, off + a)] -= 1.0;
                }
                let diff = delta_f - proj_trace * &delta_t;
                stab += diff.transpose() * space.face_mass(f) * diff / mesh.face_diameter(f);
            }
        }
        _ => unreachable!(),
    }

    Ok(CellOperators {
        energy,
        stab,
        reconstruction: Reconstruction::Potential {
            map: recon_map,
            basis: recon_basis,
        },
        n_local,
    })
}

/// Per-cell static condensation data.
pub struct LocalCondensation {
    /// Faces of the cell, cell-loop order.
    pub face_ids: Vec<usize>,
    /// Condensed face block `A_FF - A_FT A_TT^{-1} A_TF`.
    pub face_matrix: DMatrix<f64>,
    /// Cell-solution map `U_t = -A_TT^{-1} A_TF`.
    pub cell_map: DMatrix<f64>,
    /// Load part of the cell solution `A_TT^{-1} b_t`.
    pub cell_load: DVector<f64>,
    /// Condensed right-hand side `U_t^T b_t`.
    pub face_rhs: DVector<f64>,
}

/// SPD skeleton system after static condensation and Dirichlet elimination.
pub struct CondensedSystem {
    space: Arc<HybridSpace>,
    config: MethodConfig,
    matrix: CsrMatrix,
    rhs: DVector<f64>,
    free_faces: Vec<usize>,
    solve_offset_of_face: Vec<Option<usize>>,
    local: Vec<LocalCondensation>,
}

/// Assemble the condensed skeleton system for the Poisson problem with
/// source `f` and homogeneous Dirichlet boundary conditions.
pub fn assemble_condensed(
    space: &Arc<HybridSpace>,
    config: &MethodConfig,
    f: impl Fn(Point2) -> f64,
) -> Result<CondensedSystem> {
    let mesh = space.mesh();
    let fs = space.face_block_size();

    let free_faces: Vec<usize> = (0..mesh.n_faces())
        .filter(|&f| !mesh.face(f).is_boundary())
        .collect();
    let mut solve_offset_of_face = vec![None; mesh.n_faces()];
    for (i, &fc) in free_faces.iter().enumerate() {
        solve_offset_of_face[fc] = Some(i * fs);
    }
    let n = free_faces.len() * fs;

    let mut local = Vec::with_capacity(mesh.n_cells());
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = DVector::zeros(n);
    for c in 0..mesh.n_cells() {
        let ops = cell_operators(space, config, c)?;
        let cond = condense_cell(space, c, &ops, &f)?;
        // scatter into the free-face system
        for (li, &fi) in cond.face_ids.iter().enumerate() {
            let Some(oi) = solve_offset_of_face[fi] else {
                continue;
            };
            for a in 0..fs {
                rhs[oi + a] += cond.face_rhs[li * fs + a];
            }
            for (lj, &fj) in cond.face_ids.iter().enumerate() {
                let Some(oj) = solve_offset_of_face[fj] else {
                    continue;
                };
                for a in 0..fs {
                    for b in 0..fs {
                        triplets.push((oi + a, oj + b, cond.face_matrix[(li * fs + a, lj * fs + b)]));
                    }
                }
            }
        }
        local.push(cond);
    }
    let matrix = CsrMatrix::from_triplets(n, n, triplets);

    // definiteness probe on the assembled operator
    if n > 0 {
        let (min_ritz, _) = krylov::symmetric_ritz_extremes(|x| matrix.matvec(x), n, 30)?;
        if min_ritz < -1e-10 {
            return Err(Error::Linalg(format!(
                "assembled skeleton matrix is indefinite (min Ritz {min_ritz:.3e})"
            )));
        }
    }

    Ok(CondensedSystem {
        space: Arc::clone(space),
        config: *config,
        matrix,
        rhs,
        free_faces,
        solve_offset_of_face,
        local,
    })
}

/// Condense the cell block of one cell's local system.
fn condense_cell(
    space: &HybridSpace,
    c: usize,
    ops: &CellOperators,
    f: &impl Fn(Point2) -> f64,
) -> Result<LocalCondensation> {
    let cs = space.cell_block_size();
    let n = ops.n_local();
    let nf = n - cs;
    let full = ops.full_matrix();
    let a_tt = full.view((0, 0), (cs, cs)).clone_owned();
    let a_tf = full.view((0, cs), (cs, nf)).clone_owned();
    let a_ff = full.view((cs, cs), (nf, nf)).clone_owned();
    let chol = a_tt
        .cholesky()
        .ok_or_else(|| Error::Linalg(format!("cell {c}: condensation block not SPD")))?;
    let cell_map = -chol.solve(&a_tf);
    let mut face_matrix = a_ff + a_tf.transpose() * &cell_map;
    linalg::symmetrize(&mut face_matrix);

    let b_t = basis::moments(space.cell_quad(c), |x| space.cell_basis(c).eval(x), f);
    let cell_load = chol.solve(&b_t);
    let face_rhs = cell_map.transpose() * &b_t;
    Ok(LocalCondensation {
        face_ids: space.mesh().cell_faces(c).to_vec(),
        face_matrix,
        cell_map,
        cell_load,
        face_rhs,
    })
}

impl CondensedSystem {
    pub fn space(&self) -> &Arc<HybridSpace> {
        &self.space
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn n_unknowns(&self) -> usize {
        self.rhs.len()
    }

    /// Free (non-Dirichlet) faces, ascending face id.
    pub fn free_faces(&self) -> &[usize] {
        &self.free_faces
    }

    /// Offset of a face's block in the solve vector, `None` for Dirichlet
    /// faces.
    pub fn solve_offset_of_face(&self, f: usize) -> Option<usize> {
        self.solve_offset_of_face[f]
    }

    pub fn local(&self) -> &[LocalCondensation] {
        &self.local
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.matvec(x)
    }

    /// Energy `x^T A x` of a skeleton vector.
    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        self.matrix.matvec(x).dot(x)
    }
}

/// Recover the full hybrid solution from the condensed skeleton solution:
/// `u_t = U_t g + A_TT^{-1} b_t` per cell, faces copied (Dirichlet zero).
pub fn recover_bulk(system: &CondensedSystem, skeleton: &DVector<f64>) -> HybridVector {
    let space = &system.space;
    let fs = space.face_block_size();
    let cs = space.cell_block_size();
    let mut out = HybridVector::zeros(space);
    for (c, cond) in system.local.iter().enumerate() {
        let mut g = DVector::zeros(cond.face_ids.len() * fs);
        for (lf, &f) in cond.face_ids.iter().enumerate() {
            if let Some(off) = system.solve_offset_of_face[f] {
                g.rows_mut(lf * fs, fs).copy_from(&skeleton.rows(off, fs));
            }
        }
        let u_t = &cond.cell_map * &g + &cond.cell_load;
        out.data
            .rows_mut(space.cell_dof_range(c).start, cs)
            .copy_from(&u_t);
    }
    for (i, &f) in system.free_faces.iter().enumerate() {
        out.data
            .rows_mut(space.face_dof_range(f).start, fs)
            .copy_from(&skeleton.rows(i * fs, fs));
    }
    out
}

/// HDG local solver: given face data and the load on one cell, return the
/// cell solution and flux coefficients `(u_t, q_t)`.
pub fn hdg_local_solve(
    space: &HybridSpace,
    config: &MethodConfig,
    c: usize,
    face_data: &DVector<f64>,
    f: impl Fn(Point2) -> f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if !matches!(config.method, Method::Hdg | Method::HdgPlus) {
        return Err(Error::invalid("hdg_local_solve expects an HDG-type method"));
    }
    let ops = cell_operators(space, config, c)?;
    let cond = condense_cell(space, c, &ops, &f)?;
    let u_t = &cond.cell_map * face_data + &cond.cell_load;
    let Reconstruction::Flux { map, .. } = &ops.reconstruction else {
        unreachable!()
    };
    let cs = space.cell_block_size();
    let mut local = DVector::zeros(ops.n_local());
    local.rows_mut(0, cs).copy_from(&u_t);
    local.rows_mut(cs, face_data.len()).copy_from(face_data);
    let q = map * local;
    Ok((u_t, q))
}

/// HHO potential reconstruction on local hybrid data `[u_t | faces]`.
pub fn hho_reconstruction(
    space: &HybridSpace,
    config: &MethodConfig,
    c: usize,
    local_data: &DVector<f64>,
) -> Result<(DVector<f64>, CellBasis)> {
    if !matches!(config.method, Method::Hho | Method::HhoMixed) {
        return Err(Error::invalid("hho_reconstruction expects an HHO-type method"));
    }
    let ops = cell_operators(space, config, c)?;
    let Reconstruction::Potential { map, basis } = ops.reconstruction else {
        unreachable!()
    };
    Ok((&map * local_data, basis))
}

/// Stabilisation bilinear form on local hybrid data of one cell.
pub fn stabilisation(
    space: &HybridSpace,
    config: &MethodConfig,
    c: usize,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    Ok(cell_operators(space, config, c)?.stabilisation(u, v))
}

/// `L^2` error of the cell component against a reference function.
pub fn l2_error(space: &HybridSpace, v: &HybridVector, exact: impl Fn(Point2) -> f64) -> f64 {
    let mesh = space.mesh();
    let mut err2 = 0.0;
    for c in 0..mesh.n_cells() {
        let quad = crate::quadrature::polygon_rule(
            &mesh.cell_polygon(c),
            mesh.cell_centroid(c),
            2 * space.cell_degree() + 6,
        )
        .expect("cell quadrature");
        let coeffs = v
            .data
            .rows(space.cell_dof_range(c).start, space.cell_block_size())
            .clone_owned();
        err2 += quad.integrate(|x| {
            let d = space.cell_basis(c).eval(x).dot(&coeffs) - exact(x);
            d * d
        });
    }
    err2.sqrt()
}

/// Gather the local hybrid data `[cell c | its faces]` from a global vector.
pub fn gather_local(space: &HybridSpace, c: usize, v: &HybridVector) -> DVector<f64> {
    let cs = space.cell_block_size();
    let fs = space.face_block_size();
    let faces = space.mesh().cell_faces(c);
    let mut out = DVector::zeros(cs + faces.len() * fs);
    out.rows_mut(0, cs)
        .copy_from(&v.data.rows(space.cell_dof_range(c).start, cs));
    for (lf, &f) in faces.iter().enumerate() {
        out.rows_mut(cs + lf * fs, fs)
            .copy_from(&v.data.rows(space.face_dof_range(f).start, fs));
    }
    out
}
