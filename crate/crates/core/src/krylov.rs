//! Right-preconditioned flexible GMRES and spectral estimates of the
//! preconditioned operator.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Convergence data of one FGMRES run.
#[derive(Clone, Debug)]
pub struct KrylovStats {
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual after each iteration (monotone for FGMRES).
    pub residual_history: Vec<f64>,
    /// Ritz values of the square Hessenberg projection (real parts).
    pub ritz_values: Vec<f64>,
}

impl KrylovStats {
    /// Condition-number estimate `max Ritz / min Ritz` over the positive
    /// Ritz values; 1 when fewer than two iterations were performed.
    pub fn condition_estimate(&self) -> f64 {
        estimate_condition(self)
    }
}

/// Ritz-value condition estimate; a lower bound of the true condition number
/// of the preconditioned operator.
pub fn estimate_condition(stats: &KrylovStats) -> f64 {
    if stats.iterations < 2 {
        return 1.0;
    }
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    for &v in &stats.ritz_values {
        if v > 0.0 {
            min = min.min(v);
            max = max.max(v);
        }
    }
    if min.is_finite() && min > 0.0 {
        max / min
    } else {
        1.0
    }
}

/// Flexible GMRES with right preconditioning, no restarts.
///
/// Solves `A x = b` with `apply_a`; `apply_b` applies the preconditioner to
/// produce the stored search directions. Classical Gram-Schmidt with one
/// re-orthogonalization pass keeps the basis orthonormal. On a happy
/// breakdown the exact solution is returned; when `max_iter` is reached the
/// best iterate is returned with `converged = false`.
pub fn fgmres(
    apply_a: impl Fn(&DVector<f64>) -> DVector<f64>,
    apply_b: impl Fn(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, KrylovStats)> {
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 {
        return Err(Error::invalid("fgmres needs a nonzero right-hand side"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid("fgmres tolerance must lie in (0, 1)"));
    }
    let max_iter = max_iter.min(n);

    // Arnoldi data: orthonormal basis V, preconditioned directions Z and the
    // (max_iter + 1) x max_iter Hessenberg matrix; `h_raw` keeps the
    // un-rotated projection for Ritz values
    let mut v: Vec<DVector<f64>> = vec![b / beta];
    let mut z: Vec<DVector<f64>> = Vec::new();
    let mut h = DMatrix::zeros(max_iter + 1, max_iter);
    let mut h_raw = DMatrix::zeros(max_iter + 1, max_iter);
    // Givens-rotated least-squares data
    let mut cs = vec![0.0f64; max_iter];
    let mut sn = vec![0.0f64; max_iter];
    let mut g = DVector::zeros(max_iter + 1);
    g[0] = beta;

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for j in 0..max_iter {
        let zj = apply_b(&v[j]);
        let mut w = apply_a(&zj);
        z.push(zj);

        // classical Gram-Schmidt with one re-orthogonalization pass
        let mut coeffs = vec![0.0f64; j + 1];
        for pass in 0..2 {
            for (i, vi) in v.iter().enumerate() {
                let c = w.dot(vi);
                w.axpy(-c, vi, 1.0);
                coeffs[i] += c;
                let _ = pass;
            }
        }
        for (i, &c) in coeffs.iter().enumerate() {
            h[(i, j)] = c;
            h_raw[(i, j)] = c;
        }
        let hnext = w.norm();
        h[(j + 1, j)] = hnext;
        h_raw[(j + 1, j)] = hnext;

        // apply accumulated rotations to the new column
        for i in 0..j {
            let t = cs[i] * h[(i, j)] + sn[i] * h[(i + 1, j)];
            h[(i + 1, j)] = -sn[i] * h[(i, j)] + cs[i] * h[(i + 1, j)];
            h[(i, j)] = t;
        }
        let denom = (h[(j, j)] * h[(j, j)] + hnext * hnext).sqrt();
        if denom == 0.0 {
            // fully degenerate column; treat as breakdown with current iterate
            iterations = j + 1;
            converged = true;
            break;
        }
        cs[j] = h[(j, j)] / denom;
        sn[j] = hnext / denom;
        h[(j, j)] = denom;
        h[(j + 1, j)] = 0.0;
        g[j + 1] = -sn[j] * g[j];
        g[j] *= cs[j];

        iterations = j + 1;
        let rel = g[j + 1].abs() / beta;
        history.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        if hnext <= 1e-14 * beta {
            // happy breakdown: Krylov space is invariant, solution is exact
            converged = true;
            break;
        }
        w /= hnext;
        v.push(w);
    }

    // solve the triangular least-squares system for the iterate
    let m = iterations;
    let mut y = DVector::zeros(m);
    for i in (0..m).rev() {
        let mut s = g[i];
        for k in (i + 1)..m {
            s -= h[(i, k)] * y[k];
        }
        y[i] = s / h[(i, i)];
    }
    let mut x = DVector::zeros(n);
    for (k, zk) in z.iter().take(m).enumerate() {
        x.axpy(y[k], zk, 1.0);
    }

    // Ritz values of the square Hessenberg projection; for a symmetric
    // positive definite preconditioned pair these are real positive, so the
    // real parts are taken
    let mut ritz = Vec::with_capacity(m);
    if m >= 1 {
        let hm = h_raw.view((0, 0), (m, m)).clone_owned();
        for ev in hm.complex_eigenvalues().iter() {
            ritz.push(ev.re);
        }
        ritz.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }

    let stats = KrylovStats {
        iterations: m,
        converged,
        residual_history: history,
        ritz_values: ritz,
    };
    Ok((x, stats))
}

/// Extreme Ritz values of a symmetric operator from a fixed-seed Lanczos
/// sweep; used as a cheap definiteness probe.
pub fn symmetric_ritz_extremes(
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    n: usize,
    iters: usize,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("empty operator"));
    }
    let m = iters.min(n);
    // deterministic pseudo-random start vector
    let mut state = 0x9E3779B97F4A7C15u64;
    let mut q = DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    q /= q.norm();
    let mut alphas = Vec::with_capacity(m);
    let mut betas = Vec::new();
    let mut q_prev: Option<DVector<f64>> = None;
    let mut basis: Vec<DVector<f64>> = vec![q.clone()];
    for _ in 0..m {
        let mut w = apply(&q);
        let alpha = w.dot(&q);
        w.axpy(-alpha, &q, 1.0);
        if let Some(prev) = &q_prev {
            let beta_prev = *betas.last().unwrap_or(&0.0);
            w.axpy(-beta_prev, prev, 1.0);
        }
        // full reorthogonalization for robustness at these small m
        for v in &basis {
            let c = w.dot(v);
            w.axpy(-c, v, 1.0);
        }
        alphas.push(alpha);
        let beta = w.norm();
        if beta < 1e-14 {
            break;
        }
        betas.push(beta);
        q_prev = Some(std::mem::replace(&mut q, &w / beta));
        basis.push(q.clone());
    }
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = crate::linalg::sym_eigenvalues(&t)?;
    Ok((eig[0], eig[k - 1]))
}
