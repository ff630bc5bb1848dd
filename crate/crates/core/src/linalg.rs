//! Dense linear-algebra helpers: SPD solves, symmetric and generalized
//! symmetric eigenproblems, and least-squares line fits for the studies.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Force exact symmetry by averaging with the transpose.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Solve an SPD system by Cholesky.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Linalg("Cholesky failed: matrix not SPD".into()))?;
    Ok(chol.solve(b))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut s = m.clone();
    symmetrize(&mut s);
    let eig = nalgebra::SymmetricEigen::try_new(s, f64::EPSILON, 0)
        .ok_or_else(|| Error::Linalg("symmetric eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Condition number estimate `|lambda|_max / |lambda|_min` of a symmetric matrix.
pub fn sym_condition(m: &DMatrix<f64>) -> Result<f64> {
    let vals = sym_eigenvalues(m)?;
    let max = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min = vals.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Eigenvalues of the symmetric pencil `A x = lambda B x` with `B` SPD, ascending.
///
/// The pencil is reduced with a Cholesky factor of `B`:
/// `L^{-1} A L^{-T} y = lambda y`.
pub fn generalized_sym_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Linalg("generalized eigenproblem: B not SPD".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    let yt = y.transpose();
    let z = l
        .solve_lower_triangular(&yt)
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    sym_eigenvalues(&z.transpose())
}

/// Largest eigenvalue of the symmetric pencil `A x = lambda B x`, `B` SPD.
pub fn max_generalized_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let vals = generalized_sym_eigenvalues(a, b)?;
    vals.last()
        .copied()
        .ok_or_else(|| Error::Linalg("empty eigenproblem".into()))
}

/// Orthonormal basis of the orthogonal complement of a nonzero vector.
///
/// Returns an `n x (n-1)` matrix `U` with `U^T U = I` and `U^T v = 0`, used to
/// deflate a known kernel direction out of seminorm pencils.
pub fn complement_basis(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    assert!(n >= 2, "need at least two rows to deflate a direction");
    let norm = v.norm();
    assert!(norm > 0.0, "cannot deflate the zero vector");
    // Householder reflector sending v to (a multiple of) e_0; its remaining
    // columns span the complement of v.
    let mut u = v / norm;
    u[0] += u[0].signum();
    let norm2 = u.norm_squared();
    let mut out = DMatrix::zeros(n, n - 1);
    for col in 1..n {
        for row in 0..n {
            let h = if row == col { 1.0 } else { 0.0 };
            out[(row, col - 1)] = h - 2.0 * u[row] * u[col] / norm2;
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the all-ones vector.
pub fn ones_complement_basis(n: usize) -> DMatrix<f64> {
    complement_basis(&DVector::from_element(n, 1.0))
}

/// Least-squares line fit `y = intercept + slope * x`.
///
/// Returns `(slope, intercept, r_squared)`; `r_squared` is 1 for a perfect
/// fit and 0 when the fit explains nothing (constant data fits perfectly).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let f = intercept + slope * xi;
        ss_res += (yi - f) * (yi - f);
        ss_tot += (yi - my) * (yi - my);
    }
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn generalized_eigen_matches_known_pair() {
        // A = diag(2, 6), B = diag(1, 2) -> eigenvalues {2, 3}
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 6.0]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let vals = generalized_sym_eigenvalues(&a, &b).unwrap();
        assert_relative_eq!(vals[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ones_complement_is_orthonormal_and_orthogonal_to_ones() {
        let u = ones_complement_basis(7);
        let gram = u.transpose() * &u;
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(gram[(i, j)], expect, epsilon = 1e-13);
            }
        }
        let ones = DVector::from_element(7, 1.0);
        let proj = u.transpose() * ones;
        assert!(proj.norm() < 1e-13);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (slope, intercept, r2) = linear_fit(&x, &y);
        assert_relative_eq!(slope, 2.5, epsilon = 1e-12);
        assert_relative_eq!(intercept, -1.0, epsilon = 1e-12);
        assert_relative_eq!(r2, 1.0, epsilon = 1e-12);
    }
}
