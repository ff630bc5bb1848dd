//! Compressed sparse rows plus a direct SPD solver.
//!
//! The direct solver is an envelope (profile) Cholesky factorization with a
//! reverse Cuthill-McKee reordering. All systems factorized here come from 2D
//! skeleton problems whose RCM profile is small, so this is both compact and
//! fast enough for the problem sizes this crate targets, while keeping results
//! bit-reproducible.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Symmetric-friendly CSR matrix with sorted, deduplicated columns per row.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from COO triplets; duplicate entries are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut counts = vec![0usize; n_rows];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n_rows && c < n_cols);
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                counts[r] += 1;
                prev = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for r in 0..n_rows {
            row_ptr[r + 1] = row_ptr[r] + counts[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        let mut y = DVector::zeros(self.n_rows);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// `y = A^T x` without forming the transpose.
    pub fn tr_matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.n_rows);
        let mut y = DVector::zeros(self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Dense copy of one row.
    pub fn dense_row(&self, r: usize) -> DVector<f64> {
        let mut y = DVector::zeros(self.n_cols);
        let (cols, vals) = self.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            y[c] = v;
        }
        y
    }

    /// Quadratic form `x^T A y`.
    pub fn bilinear(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.matvec(y).dot(x)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(r, c)] += v;
            }
        }
        m
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
///
/// Returns `perm` with `perm[new] = old`. Components are traversed from a
/// pseudo-peripheral vertex found by repeated BFS.
pub fn reverse_cuthill_mckee(m: &CsrMatrix) -> Vec<usize> {
    let n = m.n_rows();
    let degree = |v: usize| m.row(v).0.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_far = |start: usize, visited: &[bool]| -> usize {
        // last-level minimum-degree vertex of a BFS
        let mut seen = visited.to_vec();
        let mut frontier = vec![start];
        seen[start] = true;
        let mut last = vec![start];
        while !frontier.is_empty() {
            last = frontier.clone();
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in m.row(v).0 {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        *last.iter().min_by_key(|&&v| (degree(v), v)).unwrap()
    };

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // two BFS sweeps approximate a peripheral start
        let mut start = seed;
        start = bfs_far(start, &visited);
        start = bfs_far(start, &visited);

        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut neigh: Vec<usize> = m.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            neigh.sort_by_key(|&w| (degree(w), w));
            for w in neigh {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope Cholesky factorization of an SPD matrix, with RCM reordering.
pub struct SpdSolver {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl SpdSolver {
    pub fn new(m: &CsrMatrix) -> Result<Self> {
        assert_eq!(m.n_rows(), m.n_cols());
        let n = m.n_rows();
        if n == 0 {
            return Ok(Self {
                n,
                perm: vec![],
                first: vec![],
                offsets: vec![0],
                data: vec![],
            });
        }
        let perm = reverse_cuthill_mckee(m);
        let mut inv_perm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }

        // envelope extent per (permuted) row
        let mut first: Vec<usize> = (0..n).collect();
        for r_old in 0..n {
            let r = inv_perm[r_old];
            for &c_old in m.row(r_old).0 {
                let c = inv_perm[c_old];
                if c <= r {
                    first[r] = first[r].min(c);
                }
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0f64; offsets[n]];
        for r_old in 0..n {
            let r = inv_perm[r_old];
            let (cols, vals) = m.row(r_old);
            for (&c_old, &v) in cols.iter().zip(vals) {
                let c = inv_perm[c_old];
                if c <= r {
                    data[offsets[r] + (c - first[r])] += v;
                }
            }
        }

        // in-place profile Cholesky
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let klo = fi.max(fj);
                let mut s = data[offsets[i] + (j - fi)];
                // dot of overlapping parts of rows i and j
                let (ri, rj) = {
                    let oi = offsets[i] + (klo - fi);
                    let oj = offsets[j] + (klo - fj);
                    let len = j - klo;
                    (oi..oi + len, oj..oj + len)
                };
                let mut dot = 0.0;
                for (a, b) in ri.zip(rj) {
                    dot += data[a] * data[b];
                }
                s -= dot;
                let djj = data[offsets[j] + (j - fj)];
                data[offsets[i] + (j - fi)] = s / djj;
            }
            let mut d = data[offsets[i] + (i - fi)];
            for k in fi..i {
                let l = data[offsets[i] + (k - fi)];
                d -= l * l;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Linalg(format!(
                    "envelope Cholesky broke down at pivot {i} (d = {d:.3e})"
                )));
            }
            data[offsets[i] + (i - fi)] = d.sqrt();
        }

        Ok(Self {
            n,
            perm,
            first,
            offsets,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n);
        if self.n == 0 {
            return DVector::zeros(0);
        }
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            y[i] = b[self.perm[i]];
        }
        // forward: L y = Pb
        for i in 0..self.n {
            let fi = self.first[i];
            let off = self.offsets[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.data[off + (k - fi)] * y[k];
            }
            y[i] = s / self.data[off + (i - fi)];
        }
        // backward: L^T x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let off = self.offsets[i];
            let xi = y[i] / self.data[off + (i - fi)];
            y[i] = xi;
            for k in fi..i {
                y[k] -= self.data[off + (k - fi)] * xi;
            }
        }
        let mut x = DVector::zeros(self.n);
        for i in 0..self.n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}
