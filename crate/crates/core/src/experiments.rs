//! Parameter studies: truncation eigenvalues, weak scalability and
//! convergence sanity, all reported as CSV rows with a fixed schema.
//!
//! Studies are deterministic: grid points are traversed in a fixed order and
//! every floating-point reduction has a fixed association, so repeated runs
//! produce bit-identical CSV output.

use crate::bddc::BddcPreconditioner;
use crate::error::{Error, Result};
use crate::geometry::{Box2, Point2};
use crate::krylov;
use crate::linalg;
use crate::mesh::{agglomerate, build_cartesian, simplexify, voronoi_polygonal, PolytopalMesh};
use crate::methods::{assemble_condensed, l2_error, recover_bulk, Method, MethodConfig};
use crate::seminorms::{self, BoundaryRegion, Side};
use crate::space::HybridSpace;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Fixed CSV schema shared by all studies; inapplicable fields stay empty.
pub const CSV_HEADER: &str =
    "family,h,k,method,np,h_ratio,iterations,kappa,lambda_max,error_l2,fit_slope,fit_r2";

/// Mesh families selectable in studies and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cartesian,
    Simplicial,
    Voronoi,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cartesian => "cartesian",
            Family::Simplicial => "simplicial",
            Family::Voronoi => "voronoi",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "cartesian" => Some(Family::Cartesian),
            "simplicial" => Some(Family::Simplicial),
            "voronoi" => Some(Family::Voronoi),
            _ => None,
        }
    }

    /// Build an `n x n` mesh of this family on the unit square.
    pub fn build(&self, n: usize) -> Result<PolytopalMesh> {
        let cart = build_cartesian(n, n, Box2::unit())?;
        match self {
            Family::Cartesian => Ok(cart),
            Family::Simplicial => simplexify(&cart),
            Family::Voronoi => voronoi_polygonal(n, n, Box2::unit()),
        }
    }
}

/// One CSV row; `None` renders as an empty field.
#[derive(Clone, Debug, Default)]
pub struct StudyRow {
    pub family: String,
    pub h: Option<f64>,
    pub k: Option<usize>,
    pub method: Option<&'static str>,
    pub np: Option<usize>,
    pub h_ratio: Option<usize>,
    pub iterations: Option<usize>,
    pub kappa: Option<f64>,
    pub lambda_max: Option<f64>,
    pub error_l2: Option<f64>,
    pub fit_slope: Option<f64>,
    pub fit_r2: Option<f64>,
}

impl StudyRow {
    fn csv(&self) -> String {
        fn fmt_f(v: &Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        fn fmt_u(v: &Option<usize>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            fmt_f(&self.h),
            fmt_u(&self.k),
            self.method.unwrap_or(""),
            fmt_u(&self.np),
            fmt_u(&self.h_ratio),
            fmt_u(&self.iterations),
            fmt_f(&self.kappa),
            fmt_f(&self.lambda_max),
            fmt_f(&self.error_l2),
            fmt_f(&self.fit_slope),
            fmt_f(&self.fit_r2),
        )
    }
}

/// Rows of one study plus CSV serialization.
#[derive(Clone, Debug, Default)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
}

impl StudyResult {
    /// CSV text with the fixed header and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv());
            out.push('\n');
        }
        out
    }
}

/// The manufactured solution `sin(2 pi x) sin(2 pi y) x (x-1) y (y-1)`.
pub fn manufactured_solution(p: Point2) -> f64 {
    g1(p.x) * g1(p.y)
}

/// Its negative Laplacian, used as the benchmark source term.
pub fn manufactured_source(p: Point2) -> f64 {
    -(g2(p.x) * g1(p.y) + g1(p.x) * g2(p.y))
}

fn g1(t: f64) -> f64 {
    (2.0 * std::f64::consts::PI * t).sin() * t * (t - 1.0)
}

fn g2(t: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let (s, c) = ((tau * t).sin(), (tau * t).cos());
    -tau * tau * s * t * (t - 1.0) + 2.0 * tau * c * (2.0 * t - 1.0) + 2.0 * s
}

/// Largest eigenvalue of the truncation operator pencil on one mesh/degree.
///
/// Assembles the boundary seminorm Gram `H`, the region mean vector
/// `S_Gamma` and the truncation mask, forms
/// `A = (I - 1 Sbar)^T R H R (I - 1 Sbar)` and `B = H + S^T S`, and returns
/// the largest eigenvalue of the dense pencil `A x = lambda B x`.
pub fn truncation_lambda_max(space: &HybridSpace, region: &BoundaryRegion) -> Result<f64> {
    let gram = seminorms::hhalf_gram(space)?;
    let h = gram.matrix();
    let s = seminorms::boundary_mean_vector(space, region);
    let mask = seminorms::truncation_mask(space, region);
    let ones = space.boundary_constant()?.data;
    let sbar = &s / region.measure();

    // H_R = R H R, then two rank-one updates fold in the mean subtraction:
    // A = (I - sbar 1^T)... applied from both sides
    let n = h.nrows();
    let mut h_r = h.clone();
    for i in 0..n {
        for j in 0..n {
            h_r[(i, j)] *= mask[i] * mask[j];
        }
    }
    let hr_ones = &h_r * &ones;
    let quad = ones.dot(&hr_ones);
    let mut a = h_r;
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += -sbar[j] * hr_ones[i] - sbar[i] * hr_ones[j] + sbar[i] * sbar[j] * quad;
        }
    }
    linalg::symmetrize(&mut a);

    let mut b = h.clone();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += s[i] * s[j];
        }
    }
    linalg::max_generalized_eigenvalue(&a, &b)
}

/// Truncation-eigenvalue study on Cartesian meshes of the unit square.
///
/// `ns` are the mesh resolutions (`h = 1/n`), `ks` the face degrees and
/// `gamma` the boundary sides forming the truncation region. Per degree, the
/// largest eigenvalues are fitted against `|ln h|`.
pub fn truncation_study(ns: &[usize], ks: &[usize], gamma: &[Side]) -> Result<StudyResult> {
    if ns.is_empty() || ks.is_empty() || gamma.is_empty() {
        return Err(Error::invalid("truncation study needs nonempty grids"));
    }
    let mut rows = Vec::new();
    for &k in ks {
        let mut lambdas = Vec::new();
        for &n in ns {
            let mesh = Arc::new(build_cartesian(n, n, Box2::unit())?);
            let space = HybridSpace::new(mesh, 0, k)?;
            let region = BoundaryRegion::sides(&space, gamma)?;
            let lambda = truncation_lambda_max(&space, &region)?;
            lambdas.push((n, lambda));
        }
        let x: Vec<f64> = lambdas.iter().map(|&(n, _)| (n as f64).ln()).collect();
        let y: Vec<f64> = lambdas.iter().map(|&(_, l)| l).collect();
        let (slope, _intercept, r2) = linalg::linear_fit(&x, &y);
        for &(n, lambda) in &lambdas {
            rows.push(StudyRow {
                family: "cartesian".into(),
                h: Some(1.0 / n as f64),
                k: Some(k),
                lambda_max: Some(lambda),
                fit_slope: Some(slope),
                fit_r2: Some(r2),
                ..Default::default()
            });
        }
    }
    Ok(StudyResult { rows })
}

/// Outcome of one preconditioned solve of the benchmark problem.
pub struct SolveOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub kappa: f64,
    pub lambda_max: f64,
    pub error_l2: f64,
    pub mesh: Arc<PolytopalMesh>,
    /// Cell averages of the recovered solution, for VTK output.
    pub cell_values: Vec<f64>,
    pub subdomain_ids: Vec<usize>,
}

/// Assemble, precondition and solve the benchmark Poisson problem.
pub fn solve_benchmark(
    method: Method,
    family: Family,
    n: usize,
    k: usize,
    np: usize,
    tol: f64,
) -> Result<SolveOutcome> {
    let npx = (np as f64).sqrt().round() as usize;
    if npx * npx != np {
        return Err(Error::invalid(format!(
            "subdomain count {np} must be a square number"
        )));
    }
    let mesh = Arc::new(family.build(n)?);
    let partition = agglomerate(&mesh, npx, npx)?;
    let config = MethodConfig::new(method, k);
    let space = Arc::new(config.make_space(Arc::clone(&mesh))?);
    let system = assemble_condensed(&space, &config, manufactured_source)?;
    let precond = BddcPreconditioner::new(&system, &partition)?;

    let (skeleton, stats) = krylov::fgmres(
        |x| system.apply(x),
        |r| precond.apply(r).expect("preconditioner apply"),
        system.rhs(),
        tol,
        500,
    )?;
    let solution = recover_bulk(&system, &skeleton);
    let error = l2_error(&space, &solution, manufactured_solution);

    let cell_values = (0..mesh.n_cells())
        .map(|c| space.eval_cell(&solution, c, mesh.cell_centroid(c)))
        .collect();
    let lambda_max = stats
        .ritz_values
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    Ok(SolveOutcome {
        iterations: stats.iterations,
        converged: stats.converged,
        kappa: stats.condition_estimate(),
        lambda_max,
        error_l2: error,
        mesh,
        cell_values,
        subdomain_ids: partition.subdomain_ids().to_vec(),
    })
}

/// Weak-scalability study: for each `(k, np, H/h)` grid point, solve the
/// benchmark with FGMRES + BDDC and record iterations and the condition
/// estimate. Per `(k, np)` group the estimates are fitted against
/// `(1 + ln(H/h))^2`.
pub fn scaling_study(
    method: Method,
    family: Family,
    h_ratios: &[usize],
    nps: &[usize],
    ks: &[usize],
    tol: f64,
) -> Result<StudyResult> {
    if h_ratios.is_empty() || nps.is_empty() || ks.is_empty() {
        return Err(Error::invalid("scaling study needs nonempty grids"));
    }
    let mut rows = Vec::new();
    for &k in ks {
        for &np in nps {
            let mut group: Vec<(usize, usize, StudyRow)> = Vec::new();
            for &hh in h_ratios {
                let npx = (np as f64).sqrt().round() as usize;
                let n = npx * hh;
                let outcome = solve_benchmark(method, family, n, k, np, tol)?;
                let row = StudyRow {
                    family: family.name().into(),
                    h: Some(1.0 / n as f64),
                    k: Some(k),
                    method: Some(method.name()),
                    np: Some(np),
                    h_ratio: Some(hh),
                    iterations: Some(outcome.iterations),
                    kappa: Some(outcome.kappa),
                    lambda_max: Some(outcome.lambda_max),
                    error_l2: Some(outcome.error_l2),
                    ..Default::default()
                };
                group.push((hh, outcome.iterations, row));
            }
            // fit kappa against (1 + ln(H/h))^2 across the ratio grid
            if group.len() >= 2 {
                let x: Vec<f64> = group
                    .iter()
                    .map(|(hh, _, _)| (1.0 + (*hh as f64).ln()).powi(2))
                    .collect();
                let y: Vec<f64> = group
                    .iter()
                    .map(|(_, _, row)| row.kappa.unwrap())
                    .collect();
                let (slope, _intercept, r2) = linalg::linear_fit(&x, &y);
                for (_, _, row) in &mut group {
                    row.fit_slope = Some(slope);
                    row.fit_r2 = Some(r2);
                }
            }
            rows.extend(group.into_iter().map(|(_, _, row)| row));
        }
    }
    Ok(StudyResult { rows })
}

/// Convergence sanity study on the manufactured solution: one row per mesh,
/// with the fitted `L^2` rate (slope of `log2 error` vs `log2 h`) attached.
pub fn convergence_study(
    method: Method,
    family: Family,
    k: usize,
    ns: &[usize],
    tol: f64,
) -> Result<StudyResult> {
    if ns.len() < 2 {
        return Err(Error::invalid("convergence study needs at least two meshes"));
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &n in ns {
        let np = if n % 2 == 0 && n >= 4 { 4 } else { 1 };
        let outcome = solve_benchmark(method, family, n, k, np, tol)?;
        errors.push((n, outcome.error_l2));
        rows.push(StudyRow {
            family: family.name().into(),
            h: Some(1.0 / n as f64),
            k: Some(k),
            method: Some(method.name()),
            np: Some(np),
            iterations: Some(outcome.iterations),
            kappa: Some(outcome.kappa),
            error_l2: Some(outcome.error_l2),
            ..Default::default()
        });
    }
    let x: Vec<f64> = errors.iter().map(|&(n, _)| (1.0 / n as f64).log2()).collect();
    let y: Vec<f64> = errors.iter().map(|&(_, e)| e.log2()).collect();
    let (rate, _intercept, r2) = linalg::linear_fit(&x, &y);
    for row in &mut rows {
        row.fit_slope = Some(rate);
        row.fit_r2 = Some(r2);
    }
    Ok(StudyResult { rows })
}

/// Dense eigenvalues of the preconditioned operator `B A`, for small
/// instances: the operator is materialized column by column and reduced to a
/// symmetric problem with a Cholesky factor of `A`.
pub fn preconditioned_eigenvalues(
    system: &crate::methods::CondensedSystem,
    precond: &BddcPreconditioner,
) -> Result<Vec<f64>> {
    let n = system.n_unknowns();
    let a = system.matrix().to_dense();
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let col = precond.apply(&e)?;
        b.column_mut(j).copy_from(&col);
    }
    // eigenvalues of B A = eigenvalues of L^T B L with A = L L^T
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Linalg("condensed matrix not SPD".into()))?;
    let l = chol.l();
    let m = l.transpose() * b * &l;
    linalg::sym_eigenvalues(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn manufactured_source_matches_finite_differences() {
        // second-order central differences of the manufactured solution
        let h = 1e-5;
        for &(x, y) in &[(0.3, 0.4), (0.71, 0.12), (0.5, 0.5)] {
            let p = Point2::new(x, y);
            let lap = (manufactured_solution(Point2::new(x + h, y))
                + manufactured_solution(Point2::new(x - h, y))
                + manufactured_solution(Point2::new(x, y + h))
                + manufactured_solution(Point2::new(x, y - h))
                - 4.0 * manufactured_solution(p))
                / (h * h);
            assert_relative_eq!(manufactured_source(p), -lap, epsilon = 1e-4);
        }
    }

    #[test]
    fn manufactured_solution_vanishes_on_boundary() {
        for t in [0.0f64, 0.25, 0.8, 1.0] {
            assert_eq!(manufactured_solution(Point2::new(t, 0.0)), 0.0);
            assert_eq!(manufactured_solution(Point2::new(0.0, t)), 0.0);
            assert_eq!(manufactured_solution(Point2::new(t, 1.0)), 0.0);
            assert_eq!(manufactured_solution(Point2::new(1.0, t)), 0.0);
        }
    }

    #[test]
    fn whole_boundary_truncation_is_bounded_by_one() {
        // R = identity: the pencil is dominated by its denominator
        for k in [0usize, 1] {
            let mesh = Arc::new(build_cartesian(8, 8, Box2::unit()).unwrap());
            let space = HybridSpace::new(mesh, 0, k).unwrap();
            let region = BoundaryRegion::whole_boundary(&space).unwrap();
            let lambda = truncation_lambda_max(&space, &region).unwrap();
            assert!(lambda <= 1.0 + 1e-10, "k = {k}: lambda = {lambda}");
            assert!(lambda > 0.0);
        }
    }

    #[test]
    fn csv_is_deterministic_and_has_fixed_header() {
        let sides = [Side::Top];
        let a = truncation_study(&[4, 8], &[0], &sides).unwrap().to_csv();
        let b = truncation_study(&[4, 8], &[0], &sides).unwrap().to_csv();
        assert_eq!(a, b, "repeated runs must be bit-identical");
        assert!(a.starts_with(CSV_HEADER));
        // 2 data rows + header
        assert_eq!(a.lines().count(), 3);
        // empty fields for non-applicable columns (method, np)
        let row = a.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 12);
        assert_eq!(fields[3], "");
        assert_eq!(fields[4], "");
    }
}
