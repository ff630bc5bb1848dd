//! Quadrature on segments, triangles and star-shaped polygons.
//!
//! Polygon rules are built by fan triangulation from a given interior point
//! (the cell barycenter in practice) with a Duffy-type tensor rule on each
//! triangle. Rules advertise the polynomial degree they integrate exactly.

use crate::error::{Error, Result};
use crate::geometry::{polygon_signed_area, Point2};
use nalgebra::DVector;

/// Points and positive weights integrating polynomials up to `exactness`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total weight, i.e. the measure of the integration domain.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a scalar function.
    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrate a vector-valued function (e.g. all basis values at once).
    pub fn integrate_vector(&self, f: impl Fn(Point2) -> DVector<f64>) -> DVector<f64> {
        let mut acc: Option<DVector<f64>> = None;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            let v = f(x) * w;
            match &mut acc {
                Some(a) => *a += v,
                None => acc = Some(v),
            }
        }
        acc.expect("empty quadrature rule")
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes are found by Newton iteration on the Legendre recurrence; `n` points
/// integrate degree `2n - 1` exactly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature on the segment `[a, b]`, exact for 1D polynomials up to `degree`.
pub fn segment_rule(a: Point2, b: Point2, degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (nodes, weights) = gauss_legendre(n);
    let len = (b - a).norm();
    let mid = Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
    let half = (b - a) * 0.5;
    let points = nodes.iter().map(|&t| mid + half * t).collect();
    let w = weights.iter().map(|&w| w * 0.5 * len).collect();
    QuadratureRule {
        points,
        weights: w,
        exactness: 2 * n - 1,
    }
}

/// Quadrature on a triangle, exact up to `degree`, by a Duffy tensor rule.
pub fn triangle_rule(v0: Point2, v1: Point2, v2: Point2, degree: usize) -> QuadratureRule {
    // On the reference triangle, the collapsed-square integrand picks up one
    // extra power in the first direction.
    let nu = (degree + 3) / 2;
    let nv = (degree + 2) / 2;
    let (xu, wu) = gauss_legendre(nu.max(1));
    let (xv, wv) = gauss_legendre(nv.max(1));
    let area2 = {
        let e1 = v1 - v0;
        let e2 = v2 - v0;
        e1.x * e2.y - e1.y * e2.x
    };
    let mut points = Vec::with_capacity(xu.len() * xv.len());
    let mut weights = Vec::with_capacity(xu.len() * xv.len());
    for (&tu, &cu) in xu.iter().zip(&wu) {
        let u = 0.5 * (tu + 1.0);
        for (&tv, &cv) in xv.iter().zip(&wv) {
            let v = 0.5 * (tv + 1.0);
            let xi = u;
            let eta = v * (1.0 - u);
            let p = v0 + (v1 - v0) * xi + (v2 - v0) * eta;
            let w = cu * cv * 0.25 * (1.0 - u) * area2;
            points.push(p);
            weights.push(w);
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness: degree,
    }
}

/// Quadrature on a simple polygon, by fan triangulation from `center`.
///
/// The polygon must be star-shaped with respect to `center` (all fan
/// triangles positively oriented); self-intersecting loops are rejected.
pub fn polygon_rule(verts: &[Point2], center: Point2, degree: usize) -> Result<QuadratureRule> {
    if verts.len() < 3 {
        return Err(Error::invalid("polygon needs at least 3 vertices"));
    }
    let area = polygon_signed_area(verts);
    if area <= 0.0 {
        return Err(Error::invalid("polygon loop must be CCW with positive area"));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..verts.len() {
        let a = verts[i];
        let b = verts[(i + 1) % verts.len()];
        let tri_area = 0.5 * ((a - center).x * (b - center).y - (a - center).y * (b - center).x);
        if tri_area <= 0.0 {
            return Err(Error::invalid(
                "polygon is not star-shaped from its centroid (or not simple)",
            ));
        }
        let rule = triangle_rule(center, a, b, degree);
        points.extend(rule.points);
        weights.extend(rule.weights);
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness: degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_centroid, Box2};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let num: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(d as i32)).sum();
                let exact = if d % 2 == 1 {
                    0.0
                } else {
                    2.0 / (d as f64 + 1.0)
                };
                assert_relative_eq!(num, exact, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn unit_square_degree0_weights_sum_to_one() {
        let v = Box2::unit().corners().to_vec();
        let c = polygon_centroid(&v);
        let rule = polygon_rule(&v, c, 0).unwrap();
        assert_relative_eq!(rule.total_weight(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn unit_triangle_integrates_xy() {
        let rule = triangle_rule(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            2,
        );
        let val = rule.integrate(|p| p.x * p.y);
        assert_relative_eq!(val, 1.0 / 24.0, epsilon = 1e-14);
    }

    #[test]
    fn pentagon_area_matches_shoelace_oracle() {
        // regular pentagon, radius 1
        let verts: Vec<Point2> = (0..5)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Point2::new(th.cos(), th.sin())
            })
            .collect();
        let exact = polygon_signed_area(&verts);
        let c = polygon_centroid(&verts);
        let rule = polygon_rule(&verts, c, 3).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), exact, epsilon = 1e-12);
    }

    #[test]
    fn polygon_monomials_exact_to_advertised_degree() {
        // integrate x^a y^b on [0,1]^2 against the closed form 1/((a+1)(b+1))
        let v = Box2::unit().corners().to_vec();
        let c = polygon_centroid(&v);
        for deg in 0..=8usize {
            let rule = polygon_rule(&v, c, deg).unwrap();
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let num = rule.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    let exact = 1.0 / ((a as f64 + 1.0) * (b as f64 + 1.0));
                    assert_relative_eq!(num, exact, epsilon = 1e-12, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_simple_polygon_rejected() {
        // bow-tie
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let c = Point2::new(0.5, 0.5);
        assert!(polygon_rule(&verts, c, 1).is_err());
    }

    #[test]
    fn all_weights_positive() {
        let verts: Vec<Point2> = (0..7)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / 7.0;
                Point2::new(2.0 * th.cos(), th.sin() - 0.3)
            })
            .collect();
        let c = polygon_centroid(&verts);
        let rule = polygon_rule(&verts, c, 5).unwrap();
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }
}
