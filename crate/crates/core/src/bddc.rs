//! Two-level BDDC preconditioner for the condensed skeleton system.
//!
//! The skeleton unknowns split per subdomain into interior faces (strictly
//! inside one subdomain) and interface faces (on a coarse face between two
//! subdomains). The preconditioner is
//! `B = Q Atilde^{-1} Q^T + A_0^{-1}` where `A_0^{-1}` solves independent
//! interior-face Dirichlet problems, `Atilde^{-1}` is realized by
//! per-subdomain Lagrange-multiplier saddle solves (one mean-value constraint
//! per coarse face) plus a globally assembled coarse problem, and
//! `Q = E W` averages the two interface copies and extends them harmonically
//! into the subdomain interiors.
//!
//! Interior blocks are eliminated through sparse factorizations; interface
//! Schur complements, saddle systems and the coarse matrix are small and
//! dense.

use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::CoarsePartition;
use crate::methods::CondensedSystem;
use crate::sparse::{CsrMatrix, SpdSolver};
use nalgebra::{DMatrix, DVector};

/// Local solver data of one subdomain.
pub struct SubdomainOperator {
    /// Face block size of the space.
    fs: usize,
    /// Global face ids interior to the subdomain, ascending.
    interior_faces: Vec<usize>,
    /// Global face ids on the subdomain's coarse faces, ascending.
    interface_faces: Vec<usize>,
    /// Solve-space offsets of the interior face blocks.
    interior_offsets: Vec<usize>,
    /// Solve-space offsets of the interface face blocks.
    interface_offsets: Vec<usize>,
    /// Interior block `A_II` and its factorization.
    a_ii: CsrMatrix,
    a_ii_solver: SpdSolver,
    /// Coupling `A_{Gamma I}` (interface rows, interior columns).
    a_gi: CsrMatrix,
    /// Dense interface Schur complement `S_T`.
    schur: DMatrix<f64>,
    /// Mean-value constraint matrix `C_T` (one row per coarse face).
    constraints: DMatrix<f64>,
    /// Global coarse-face ids matching the constraint rows.
    coarse_ids: Vec<usize>,
    /// LU of the saddle system `[S C^T; C 0]`.
    saddle: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// Energy-minimal coarse basis on the interface (`C Psi = I`).
    psi: DMatrix<f64>,
    /// Coarse contribution `Psi^T S Psi`.
    coarse_block: DMatrix<f64>,
}

impl SubdomainOperator {
    pub fn n_interior(&self) -> usize {
        self.interior_offsets.len() * self.fs
    }

    pub fn n_interface(&self) -> usize {
        self.interface_offsets.len() * self.fs
    }

    fn block(&self) -> usize {
        self.fs
    }

    pub fn interior_faces(&self) -> &[usize] {
        &self.interior_faces
    }

    pub fn interface_faces(&self) -> &[usize] {
        &self.interface_faces
    }

    pub fn schur(&self) -> &DMatrix<f64> {
        &self.schur
    }

    pub fn constraints(&self) -> &DMatrix<f64> {
        &self.constraints
    }

    pub fn coarse_ids(&self) -> &[usize] {
        &self.coarse_ids
    }

    /// This subdomain's contribution to the coarse matrix.
    pub fn coarse_block(&self) -> &DMatrix<f64> {
        &self.coarse_block
    }

    /// Energy-minimizing extension of interface values: returns
    /// `(v_I, g)` with `A_II v_I = -A_IG g`.
    pub fn harmonic_extension(&self, g: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.a_gi.n_cols() + g.len());
        if self.a_gi.n_cols() > 0 {
            let rhs = -self.a_gi.tr_matvec(g);
            let v_i = self.a_ii_solver.solve(&rhs);
            out.rows_mut(0, v_i.len()).copy_from(&v_i);
        }
        out.rows_mut(self.a_gi.n_cols(), g.len()).copy_from(g);
        out
    }

    /// Subdomain energy `v^T A_T v` of a local `[interior | interface]`
    /// vector.
    pub fn local_energy(&self, v: &DVector<f64>) -> f64 {
        let n_i = self.a_gi.n_cols();
        let n_g = self.a_gi.n_rows();
        let v_i = v.rows(0, n_i).clone_owned();
        let v_g = v.rows(n_i, n_g).clone_owned();
        let mut e = self.a_ii.bilinear(&v_i, &v_i);
        e += 2.0 * self.a_gi.matvec(&v_i).dot(&v_g);
        // interface-interface part comes from the Schur plus the eliminated
        // coupling: A_GG = S + A_GI A_II^{-1} A_IG
        let agg = &self.schur + self.a_gg_correction();
        e += (agg * &v_g).dot(&v_g);
        e
    }

    fn a_gg_correction(&self) -> DMatrix<f64> {
        let n_g = self.a_gi.n_rows();
        let mut corr = DMatrix::zeros(n_g, n_g);
        if self.a_gi.n_cols() == 0 {
            return corr;
        }
        for j in 0..n_g {
            let col = self.a_ii_solver.solve(&self.a_gi.dense_row(j));
            let s = self.a_gi.matvec(&col);
            corr.column_mut(j).copy_from(&s);
        }
        corr
    }

    /// Constrained Neumann solve `[S C^T; C 0] [w; lam] = [rho; 0]`.
    fn neumann_solve(&self, rho: &DVector<f64>) -> Result<DVector<f64>> {
        let n_g = self.schur.nrows();
        let Some(saddle) = &self.saddle else {
            return Ok(DVector::zeros(n_g));
        };
        let nc = self.constraints.nrows();
        let mut rhs = DVector::zeros(n_g + nc);
        rhs.rows_mut(0, n_g).copy_from(rho);
        let sol = saddle
            .solve(&rhs)
            .ok_or_else(|| Error::Solver("subdomain saddle solve failed".into()))?;
        Ok(sol.rows(0, n_g).clone_owned())
    }
}

/// The assembled two-level preconditioner.
pub struct BddcPreconditioner {
    subdomains: Vec<SubdomainOperator>,
    /// Cholesky factor of the coarse matrix (one unknown per coarse face).
    coarse: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    coarse_matrix: DMatrix<f64>,
    n: usize,
}

impl BddcPreconditioner {
    /// Set up the preconditioner for a condensed system and partition.
    pub fn new(system: &CondensedSystem, partition: &CoarsePartition) -> Result<Self> {
        let space = system.space();
        let mesh = space.mesh();
        let fs = space.face_block_size();
        let n = system.n_unknowns();
        let n_coarse = partition.coarse_faces().len();

        let mut subdomains = Vec::with_capacity(partition.n_subdomains());
        let mut coarse_matrix = DMatrix::zeros(n_coarse, n_coarse);

        for t in 0..partition.n_subdomains() {
            // classify the free faces of this subdomain
            let mut interior_faces = Vec::new();
            let mut interface_faces = Vec::new();
            for &c in partition.cells_of(t) {
                for &f in mesh.cell_faces(c) {
                    if system.solve_offset_of_face(f).is_none() {
                        continue; // Dirichlet face
                    }
                    let face = mesh.face(f);
                    let nb = face.neighbor.expect("free faces are interior");
                    let (sa, sb) = (
                        partition.subdomain_of_cell(face.owner),
                        partition.subdomain_of_cell(nb),
                    );
                    if sa == t && sb == t {
                        interior_faces.push(f);
                    } else if sa == t || sb == t {
                        interface_faces.push(f);
                    }
                }
            }
            interior_faces.sort_unstable();
            interior_faces.dedup();
            interface_faces.sort_unstable();
            interface_faces.dedup();

            let n_i = interior_faces.len() * fs;
            let n_g = interface_faces.len() * fs;
            let local_of_face: std::collections::HashMap<usize, usize> = interior_faces
                .iter()
                .enumerate()
                .map(|(i, &f)| (f, i * fs))
                .chain(
                    interface_faces
                        .iter()
                        .enumerate()
                        .map(|(i, &f)| (f, n_i + i * fs)),
                )
                .collect();

            // assemble A_T from the per-cell condensed blocks
            let mut t_ii = Vec::new();
            let mut t_gi = Vec::new();
            let mut a_gg = DMatrix::zeros(n_g, n_g);
            for &c in partition.cells_of(t) {
                let cond = &system.local()[c];
                for (li, &fi) in cond.face_ids.iter().enumerate() {
                    let Some(&oi) = local_of_face.get(&fi) else {
                        continue;
                    };
                    for (lj, &fj) in cond.face_ids.iter().enumerate() {
                        let Some(&oj) = local_of_face.get(&fj) else {
                            continue;
                        };
                        for a in 0..fs {
                            for b in 0..fs {
                                let v = cond.face_matrix[(li * fs + a, lj * fs + b)];
                                let (ri, cj) = (oi + a, oj + b);
                                match (ri < n_i, cj < n_i) {
                                    (true, true) => t_ii.push((ri, cj, v)),
                                    (false, true) => t_gi.push((ri - n_i, cj, v)),
                                    (false, false) => a_gg[(ri - n_i, cj - n_i)] += v,
                                    (true, false) => {} // symmetric to (false, true)
                                }
                            }
                        }
                    }
                }
            }
            let a_ii = CsrMatrix::from_triplets(n_i, n_i, t_ii);
            let a_gi = CsrMatrix::from_triplets(n_g, n_i, t_gi);
            let a_ii_solver = SpdSolver::new(&a_ii)?;

            // dense interface Schur complement
            let mut schur = a_gg;
            for j in 0..n_g {
                if n_i == 0 {
                    break;
                }
                let x = a_ii_solver.solve(&a_gi.dense_row(j));
                let corr = a_gi.matvec(&x);
                for i in 0..n_g {
                    schur[(i, j)] -= corr[i];
                }
            }
            linalg::symmetrize(&mut schur);

            // one mean-value constraint per coarse face of this subdomain
            let coarse_ids: Vec<usize> = partition
                .coarse_faces()
                .iter()
                .enumerate()
                .filter(|(_, cf)| cf.subdomains.0 == t || cf.subdomains.1 == t)
                .map(|(i, _)| i)
                .collect();
            let mut constraints = DMatrix::zeros(coarse_ids.len(), n_g);
            for (row, &cf) in coarse_ids.iter().enumerate() {
                for &f in &partition.coarse_faces()[cf].fine_faces {
                    let lf = interface_faces
                        .binary_search(&f)
                        .expect("interface face belongs to its coarse face");
                    let m = space
                        .face_quad(f)
                        .integrate_vector(|x| space.face_basis(f).eval(x));
                    for a in 0..fs {
                        constraints[(row, lf * fs + a)] = m[a];
                    }
                }
            }

            // saddle factorization and coarse basis
            let nc = coarse_ids.len();
            let (saddle, psi, coarse_block) = if n_g > 0 {
                let mut k = DMatrix::zeros(n_g + nc, n_g + nc);
                k.view_mut((0, 0), (n_g, n_g)).copy_from(&schur);
                k.view_mut((0, n_g), (n_g, nc))
                    .copy_from(&constraints.transpose());
                k.view_mut((n_g, 0), (nc, n_g)).copy_from(&constraints);
                let lu = k.lu();
                let mut rhs = DMatrix::zeros(n_g + nc, nc);
                for r in 0..nc {
                    rhs[(n_g + r, r)] = 1.0;
                }
                let sol = lu.solve(&rhs).ok_or_else(|| {
                    Error::Solver(format!(
                        "subdomain {t}: rank-deficient constraint block in the saddle system"
                    ))
                })?;
                let psi = sol.view((0, 0), (n_g, nc)).clone_owned();
                let mut block = psi.transpose() * &schur * &psi;
                linalg::symmetrize(&mut block);
                (Some(lu), psi, block)
            } else {
                (None, DMatrix::zeros(0, nc), DMatrix::zeros(nc, nc))
            };

            for (r, &cfr) in coarse_ids.iter().enumerate() {
                for (cc, &cfc) in coarse_ids.iter().enumerate() {
                    coarse_matrix[(cfr, cfc)] += coarse_block[(r, cc)];
                }
            }

            let interior_offsets = interior_faces
                .iter()
                .map(|&f| system.solve_offset_of_face(f).unwrap())
                .collect();
            let interface_offsets = interface_faces
                .iter()
                .map(|&f| system.solve_offset_of_face(f).unwrap())
                .collect();

            subdomains.push(SubdomainOperator {
                fs,
                interior_faces,
                interface_faces,
                interior_offsets,
                interface_offsets,
                a_ii,
                a_ii_solver,
                a_gi,
                schur,
                constraints,
                coarse_ids,
                saddle,
                psi,
                coarse_block,
            });
        }

        let coarse = if n_coarse > 0 {
            let chol = coarse_matrix.clone().cholesky().ok_or_else(|| {
                Error::Solver("coarse matrix is not SPD".into())
            })?;
            Some(chol)
        } else {
            None
        };

        Ok(Self {
            subdomains,
            coarse,
            coarse_matrix,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn subdomains(&self) -> &[SubdomainOperator] {
        &self.subdomains
    }

    /// Assembled coarse matrix (one unknown per coarse face).
    pub fn coarse_matrix(&self) -> &DMatrix<f64> {
        &self.coarse_matrix
    }

    /// Average the per-subdomain interface copies back to the conforming
    /// space: each interface fine-face DOF gets half the sum of its two
    /// values; non-interface DOFs are copied from `base`.
    pub fn weighting_apply(&self, base: &DVector<f64>, copies: &[DVector<f64>]) -> DVector<f64> {
        let mut out = base.clone();
        for sub in &self.subdomains {
            for off in &sub.interface_offsets {
                let fsz = sub.block();
                for a in 0..fsz {
                    out[off + a] = 0.0;
                }
            }
        }
        for (t, sub) in self.subdomains.iter().enumerate() {
            let fsz = sub.block();
            for (lf, off) in sub.interface_offsets.iter().enumerate() {
                for a in 0..fsz {
                    out[off + a] += 0.5 * copies[t][lf * fsz + a];
                }
            }
        }
        out
    }

    /// Duplicate the interface values of a conforming vector per subdomain.
    pub fn inject(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        self.subdomains
            .iter()
            .map(|sub| {
                let fsz = sub.block();
                let mut v = DVector::zeros(sub.n_interface());
                for (lf, off) in sub.interface_offsets.iter().enumerate() {
                    for a in 0..fsz {
                        v[lf * fsz + a] = x[off + a];
                    }
                }
                v
            })
            .collect()
    }

    /// Apply the preconditioner to a conforming skeleton residual.
    pub fn apply(&self, r: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.apply_detailed(r)?.0)
    }

    /// Apply the preconditioner, also returning the per-subdomain interface
    /// vectors of the constrained solves (the component in the BDDC space,
    /// before weighting); exposed for diagnostics and invariant checks.
    pub fn apply_detailed(&self, r: &DVector<f64>) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        assert_eq!(r.len(), self.n);
        let mut z = DVector::zeros(self.n);
        let n_coarse = self.coarse_matrix.nrows();
        let mut coarse_rhs = DVector::zeros(n_coarse);

        // interior solves (the A_0^{-1} term), then the harmonically
        // condensed interface residual: an interface DOF collects the
        // corrections from both adjacent subdomains before the copies each
        // take half of it
        let mut v_i_all = Vec::with_capacity(self.subdomains.len());
        let mut rho_glob = r.clone();
        for sub in &self.subdomains {
            let fsz = sub.block();
            let mut r_i = DVector::zeros(sub.n_interior());
            for (lf, off) in sub.interior_offsets.iter().enumerate() {
                for a in 0..fsz {
                    r_i[lf * fsz + a] = r[off + a];
                }
            }
            let v_i = if sub.n_interior() > 0 {
                sub.a_ii_solver.solve(&r_i)
            } else {
                r_i
            };
            if sub.n_interface() > 0 && sub.n_interior() > 0 {
                let corr = sub.a_gi.matvec(&v_i);
                for (lf, off) in sub.interface_offsets.iter().enumerate() {
                    for a in 0..fsz {
                        rho_glob[off + a] -= corr[lf * fsz + a];
                    }
                }
            }
            v_i_all.push(v_i);
        }
        let mut rho_all = Vec::with_capacity(self.subdomains.len());
        for sub in &self.subdomains {
            let fsz = sub.block();
            let mut rho = DVector::zeros(sub.n_interface());
            for (lf, off) in sub.interface_offsets.iter().enumerate() {
                for a in 0..fsz {
                    rho[lf * fsz + a] = 0.5 * rho_glob[off + a];
                }
            }
            rho_all.push(rho);
        }

        // local constrained Neumann solves plus the coarse residual
        let mut w_all = Vec::with_capacity(self.subdomains.len());
        for (sub, rho) in self.subdomains.iter().zip(&rho_all) {
            let w = sub.neumann_solve(rho)?;
            let local_coarse = sub.psi.transpose() * rho;
            for (rr, &cf) in sub.coarse_ids.iter().enumerate() {
                coarse_rhs[cf] += local_coarse[rr];
            }
            w_all.push(w);
        }
        if let Some(chol) = &self.coarse {
            let c = chol.solve(&coarse_rhs);
            for (sub, w) in self.subdomains.iter().zip(w_all.iter_mut()) {
                for (rr, &cf) in sub.coarse_ids.iter().enumerate() {
                    w.axpy(c[cf], &sub.psi.column(rr).clone_owned(), 1.0);
                }
            }
        }

        // average the interface copies into the conforming result
        for (sub, w) in self.subdomains.iter().zip(&w_all) {
            let fsz = sub.block();
            for (lf, off) in sub.interface_offsets.iter().enumerate() {
                for a in 0..fsz {
                    z[off + a] += 0.5 * w[lf * fsz + a];
                }
            }
        }

        // harmonic extension into the interiors plus the interior correction
        for (sub, v_i) in self.subdomains.iter().zip(&v_i_all) {
            let fsz = sub.block();
            let mut g = DVector::zeros(sub.n_interface());
            for (lf, off) in sub.interface_offsets.iter().enumerate() {
                for a in 0..fsz {
                    g[lf * fsz + a] = z[off + a];
                }
            }
            let mut interior = if sub.n_interior() > 0 && sub.n_interface() > 0 {
                let rhs = -sub.a_gi.tr_matvec(&g);
                sub.a_ii_solver.solve(&rhs)
            } else {
                DVector::zeros(sub.n_interior())
            };
            interior += v_i;
            for (lf, off) in sub.interior_offsets.iter().enumerate() {
                for a in 0..fsz {
                    z[off + a] = interior[lf * fsz + a];
                }
            }
        }
        Ok((z, w_all))
    }
}
