//! Scaled monomial bases on cells and faces, local Gram matrices and
//! `L^2`-orthogonal projections.
//!
//! Cell bases are `((x - x_t)/h_t)^alpha` for `|alpha| <= k` in graded
//! lexicographic order; face bases are powers of the signed arclength from
//! the face midpoint scaled by the face length, oriented by the stored
//! vertex order of the face. A Gram-Schmidt pass (through a Cholesky factor
//! of the mass matrix) is applied only when the raw mass matrix is badly
//! conditioned, which does not happen on the mesh families generated here.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Vector2};
use crate::linalg;
use crate::quadrature::QuadratureRule;
use nalgebra::{DMatrix, DVector};

/// Mass-matrix condition number beyond which bases are re-orthonormalized.
pub const ORTHO_CONDITION_THRESHOLD: f64 = 1e8;

/// Number of 2D monomials of degree at most `k`.
pub fn cell_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Monomial exponents `(a, b)` with `a + b <= k`, graded lexicographic.
pub fn cell_exponents(k: usize) -> Vec<(u32, u32)> {
    let mut exps = Vec::with_capacity(cell_dim(k));
    for total in 0..=k as u32 {
        for a in (0..=total).rev() {
            exps.push((a, total - a));
        }
    }
    exps
}

/// Scaled monomial basis on a 2D cell.
#[derive(Clone, Debug)]
pub struct CellBasis {
    pub degree: usize,
    pub center: Point2,
    pub scale: f64,
    exps: Vec<(u32, u32)>,
    /// Coefficient transform: returned values are `O^T * raw`.
    ortho: Option<DMatrix<f64>>,
}

impl CellBasis {
    pub fn new(center: Point2, scale: f64, degree: usize) -> Self {
        Self {
            degree,
            center,
            scale,
            exps: cell_exponents(degree),
            ortho: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    fn raw_eval(&self, x: Point2) -> DVector<f64> {
        let xs = (x.x - self.center.x) / self.scale;
        let ys = (x.y - self.center.y) / self.scale;
        DVector::from_iterator(
            self.exps.len(),
            self.exps
                .iter()
                .map(|&(a, b)| xs.powi(a as i32) * ys.powi(b as i32)),
        )
    }

    fn raw_grad(&self, x: Point2) -> (DVector<f64>, DVector<f64>) {
        let xs = (x.x - self.center.x) / self.scale;
        let ys = (x.y - self.center.y) / self.scale;
        let n = self.exps.len();
        let mut gx = DVector::zeros(n);
        let mut gy = DVector::zeros(n);
        for (i, &(a, b)) in self.exps.iter().enumerate() {
            if a > 0 {
                gx[i] = a as f64 / self.scale * xs.powi(a as i32 - 1) * ys.powi(b as i32);
            }
            if b > 0 {
                gy[i] = b as f64 / self.scale * xs.powi(a as i32) * ys.powi(b as i32 - 1);
            }
        }
        (gx, gy)
    }

    /// Basis values at a point.
    pub fn eval(&self, x: Point2) -> DVector<f64> {
        let raw = self.raw_eval(x);
        match &self.ortho {
            Some(o) => o.transpose() * raw,
            None => raw,
        }
    }

    /// Componentwise gradients at a point.
    pub fn eval_grad(&self, x: Point2) -> (DVector<f64>, DVector<f64>) {
        let (gx, gy) = self.raw_grad(x);
        match &self.ortho {
            Some(o) => (o.transpose() * gx, o.transpose() * gy),
            None => (gx, gy),
        }
    }

    /// Replace the basis by a mass-orthonormal one when `mass` is badly
    /// conditioned. Returns the measured condition number.
    pub fn orthonormalize_if_needed(&mut self, mass: &DMatrix<f64>) -> Result<f64> {
        let cond = linalg::sym_condition(mass)?;
        if cond > ORTHO_CONDITION_THRESHOLD {
            let chol = mass
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Linalg("cell mass matrix not SPD".into()))?;
            let l = chol.l();
            let identity = DMatrix::identity(self.dim(), self.dim());
            let linv_t = l
                .solve_lower_triangular(&identity)
                .ok_or_else(|| Error::Linalg("singular mass Cholesky factor".into()))?
                .transpose();
            self.ortho = Some(linv_t);
        }
        Ok(cond)
    }
}

/// Scaled monomial basis on a straight face (segment).
#[derive(Clone, Debug)]
pub struct FaceBasis {
    pub degree: usize,
    pub a: Point2,
    pub b: Point2,
    pub center: Point2,
    pub length: f64,
    dir: Vector2,
    ortho: Option<DMatrix<f64>>,
}

impl FaceBasis {
    pub fn new(a: Point2, b: Point2, degree: usize) -> Self {
        let length = (b - a).norm();
        Self {
            degree,
            a,
            b,
            center: Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)),
            length,
            dir: (b - a) / length,
            ortho: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Signed arclength of `x` from the face midpoint (positive towards `b`).
    pub fn param(&self, x: Point2) -> f64 {
        (x - self.center).dot(&self.dir)
    }

    fn raw_eval_param(&self, s: f64) -> DVector<f64> {
        let t = s / self.length;
        DVector::from_iterator(self.dim(), (0..self.dim()).map(|i| t.powi(i as i32)))
    }

    pub fn eval(&self, x: Point2) -> DVector<f64> {
        let raw = self.raw_eval_param(self.param(x));
        match &self.ortho {
            Some(o) => o.transpose() * raw,
            None => raw,
        }
    }

    pub fn orthonormalize_if_needed(&mut self, mass: &DMatrix<f64>) -> Result<f64> {
        let cond = linalg::sym_condition(mass)?;
        if cond > ORTHO_CONDITION_THRESHOLD {
            let chol = mass
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Linalg("face mass matrix not SPD".into()))?;
            let l = chol.l();
            let identity = DMatrix::identity(self.dim(), self.dim());
            let linv_t = l
                .solve_lower_triangular(&identity)
                .ok_or_else(|| Error::Linalg("singular mass Cholesky factor".into()))?
                .transpose();
            self.ortho = Some(linv_t);
        }
        Ok(cond)
    }
}

/// Gram matrix `G_ij = sum_q w_q rows_i(x_q) cols_j(x_q)`.
pub fn gram(
    quad: &QuadratureRule,
    rows: impl Fn(Point2) -> DVector<f64>,
    cols: impl Fn(Point2) -> DVector<f64>,
) -> DMatrix<f64> {
    let mut m: Option<DMatrix<f64>> = None;
    for (&x, &w) in quad.points.iter().zip(&quad.weights) {
        let r = rows(x);
        let c = cols(x);
        let contrib = r * c.transpose() * w;
        match &mut m {
            Some(acc) => *acc += contrib,
            None => m = Some(contrib),
        }
    }
    m.expect("empty quadrature rule")
}

/// Stiffness matrix `K_ij = int grad phi_i . grad phi_j` of a cell basis.
pub fn stiffness_matrix(quad: &QuadratureRule, basis: &CellBasis) -> DMatrix<f64> {
    let n = basis.dim();
    let mut k = DMatrix::zeros(n, n);
    for (&x, &w) in quad.points.iter().zip(&quad.weights) {
        let (gx, gy) = basis.eval_grad(x);
        k += (&gx * gx.transpose() + &gy * gy.transpose()) * w;
    }
    k
}

/// Mass matrix of a basis given through its evaluation closure.
pub fn mass_matrix(
    quad: &QuadratureRule,
    eval: impl Fn(Point2) -> DVector<f64>,
) -> DMatrix<f64> {
    gram(quad, &eval, &eval)
}

/// Moments `b_i = int phi_i f`.
pub fn moments(
    quad: &QuadratureRule,
    eval: impl Fn(Point2) -> DVector<f64>,
    f: impl Fn(Point2) -> f64,
) -> DVector<f64> {
    let mut acc: Option<DVector<f64>> = None;
    for (&x, &w) in quad.points.iter().zip(&quad.weights) {
        let v = eval(x) * (w * f(x));
        match &mut acc {
            Some(a) => *a += v,
            None => acc = Some(v),
        }
    }
    acc.expect("empty quadrature rule")
}

/// `L^2`-orthogonal projection of `f` onto the span of a basis: solves
/// `M c = b` with `b_i = int phi_i f`.
pub fn l2_project(
    mass: &DMatrix<f64>,
    quad: &QuadratureRule,
    eval: impl Fn(Point2) -> DVector<f64>,
    f: impl Fn(Point2) -> f64,
) -> Result<DVector<f64>> {
    let b = moments(quad, eval, f);
    linalg::spd_solve(mass, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_centroid, polygon_diameter, Box2};
    use crate::quadrature::{polygon_rule, segment_rule};
    use approx::assert_relative_eq;

    fn unit_square_basis(k: usize) -> (CellBasis, QuadratureRule) {
        let verts = Box2::unit().corners().to_vec();
        let c = polygon_centroid(&verts);
        let h = polygon_diameter(&verts);
        let basis = CellBasis::new(c, h, k);
        let quad = polygon_rule(&verts, c, 2 * k + 2).unwrap();
        (basis, quad)
    }

    #[test]
    fn cell_mass_k1_unit_square_is_diagonal() {
        // centered scaled monomials {1, X, Y} on the unit square:
        // M = diag(1, 1/24, 1/24) with the sqrt(2) diameter scaling
        let (basis, quad) = unit_square_basis(1);
        let m = mass_matrix(&quad, |x| basis.eval(x));
        assert_relative_eq!(m[(0, 0)], 1.0, epsilon = 1e-13);
        assert_relative_eq!(m[(1, 1)], 1.0 / 24.0, epsilon = 1e-14);
        assert_relative_eq!(m[(2, 2)], 1.0 / 24.0, epsilon = 1e-14);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_relative_eq!(m[(i, j)], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mass_symmetric_to_machine_precision() {
        let (basis, quad) = unit_square_basis(3);
        let m = mass_matrix(&quad, |x| basis.eval(x));
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                assert!((m[(i, j)] - m[(j, i)]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_k1_unit_square_matches_hand_computation() {
        // grad X = (1/h, 0), grad Y = (0, 1/h) with h = sqrt(2):
        // K = diag(0, 1/2, 1/2)
        let (basis, quad) = unit_square_basis(1);
        let k = stiffness_matrix(&quad, &basis);
        let expect = [[0.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(k[(i, j)], expect[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn stiffness_k0_is_zero_and_rank_is_dim_minus_one() {
        let (basis0, quad0) = unit_square_basis(0);
        let k0 = stiffness_matrix(&quad0, &basis0);
        assert_relative_eq!(k0[(0, 0)], 0.0);

        let (basis2, quad2) = unit_square_basis(2);
        let k2 = stiffness_matrix(&quad2, &basis2);
        let eigs = crate::linalg::sym_eigenvalues(&k2).unwrap();
        let small = eigs.iter().filter(|&&e| e.abs() < 1e-12 * eigs[5]).count();
        assert_eq!(small, 1, "kernel of the stiffness matrix is the constants");
    }

    #[test]
    fn face_mass_k0_is_face_length() {
        let a = Point2::new(0.25, 1.0);
        let b = Point2::new(0.75, 1.0);
        let fb = FaceBasis::new(a, b, 0);
        let quad = segment_rule(a, b, 2);
        let m = mass_matrix(&quad, |x| fb.eval(x));
        assert_eq!(m.nrows(), 1);
        assert_relative_eq!(m[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn projection_reproduces_polynomials_exactly() {
        let (basis, quad) = unit_square_basis(2);
        let m = mass_matrix(&quad, |x| basis.eval(x));
        // project g(x, y) = 5 and a generic quadratic; both lie in the span
        for g in [
            Box::new(|_: Point2| 5.0) as Box<dyn Fn(Point2) -> f64>,
            Box::new(|p: Point2| 1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y - p.x * p.x),
        ] {
            let c = l2_project(&m, &quad, |x| basis.eval(x), &g).unwrap();
            for &x in &quad.points {
                let val = basis.eval(x).dot(&c);
                assert_relative_eq!(val, g(x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_residual_orthogonal() {
        // project x^2 onto the k = 1 basis of a face on [-1/2, 1/2]
        let a = Point2::new(-0.5, 0.0);
        let b = Point2::new(0.5, 0.0);
        let fb = FaceBasis::new(a, b, 1);
        let quad = segment_rule(a, b, 6);
        let m = mass_matrix(&quad, |x| fb.eval(x));
        let g = |p: Point2| p.x * p.x;
        let c = l2_project(&m, &quad, |x| fb.eval(x), g).unwrap();

        // normal-equations oracle: best L2 fit of x^2 by a + b x on [-1/2, 1/2]
        // is a = 1/12, b = 0 (computed from the analytic normal equations).
        let proj = |p: Point2| fb.eval(p).dot(&c);
        assert_relative_eq!(proj(Point2::new(0.0, 0.0)), 1.0 / 12.0, epsilon = 1e-13);
        assert_relative_eq!(
            proj(Point2::new(0.25, 0.0)) - proj(Point2::new(-0.25, 0.0)),
            0.0,
            epsilon = 1e-13
        );

        // residual orthogonal to the basis
        let resid_moments = moments(&quad, |x| fb.eval(x), |p| g(p) - proj(p));
        assert!(resid_moments.norm() < 1e-14);

        // idempotence
        let c2 = l2_project(&m, &quad, |x| fb.eval(x), &proj).unwrap();
        assert!((&c2 - &c).norm() < 1e-13);
    }

    #[test]
    fn greens_identity_on_polynomials() {
        // int_t grad(phi_i) . grad(phi_j) = -int_t phi_i lap(phi_j)
        //                                  + int_{dt} phi_i dphi_j/dn
        // checked for the quadratic basis on the unit square
        let verts = Box2::unit().corners().to_vec();
        let c = polygon_centroid(&verts);
        let h = polygon_diameter(&verts);
        let basis = CellBasis::new(c, h, 2);
        let quad = polygon_rule(&verts, c, 6).unwrap();
        let k = stiffness_matrix(&quad, &basis);

        // laplacian of scaled monomial (a, b): a(a-1)/h^2 X^{a-2} Y^b + ...
        let lap = |i: usize, x: Point2| -> f64 {
            let exps = cell_exponents(2);
            let (a, b) = exps[i];
            let xs = (x.x - c.x) / h;
            let ys = (x.y - c.y) / h;
            let mut v = 0.0;
            if a >= 2 {
                v += (a * (a - 1)) as f64 / (h * h) * xs.powi(a as i32 - 2) * ys.powi(b as i32);
            }
            if b >= 2 {
                v += (b * (b - 1)) as f64 / (h * h) * xs.powi(a as i32) * ys.powi(b as i32 - 2);
            }
            v
        };

        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                let vol = quad.integrate(|x| basis.eval(x)[i] * lap(j, x));
                let mut bnd = 0.0;
                for e in 0..4 {
                    let a = verts[e];
                    let b = verts[(e + 1) % 4];
                    let t = b - a;
                    let n = Vector2::new(t.y, -t.x) / t.norm();
                    let fq = segment_rule(a, b, 5);
                    bnd += fq.integrate(|x| {
                        let (gx, gy) = basis.eval_grad(x);
                        basis.eval(x)[i] * (gx[j] * n.x + gy[j] * n.y)
                    });
                }
                assert_relative_eq!(k[(i, j)], -vol + bnd, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn orthonormalization_triggers_and_fixes_conditioning() {
        // a deliberately mis-scaled basis (scale far larger than the cell)
        let verts = Box2::unit().corners().to_vec();
        let c = polygon_centroid(&verts);
        let mut basis = CellBasis::new(c, 4000.0, 3);
        let quad = polygon_rule(&verts, c, 8).unwrap();
        let m = mass_matrix(&quad, |x| basis.eval(x));
        let cond = basis.orthonormalize_if_needed(&m).unwrap();
        assert!(cond > ORTHO_CONDITION_THRESHOLD);
        let m2 = mass_matrix(&quad, |x| basis.eval(x));
        let cond2 = crate::linalg::sym_condition(&m2).unwrap();
        assert!(cond2 < 1e3, "orthonormalized mass condition {cond2}");
    }
}
