//! Small 2D geometry helpers shared by mesh generation and quadrature.

pub type Point2 = nalgebra::Point2<f64>;
pub type Vector2 = nalgebra::Vector2<f64>;

/// Signed area of a polygon given as a vertex loop (positive if CCW).
pub fn polygon_signed_area(verts: &[Point2]) -> f64 {
    let n = verts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(verts: &[Point2]) -> Point2 {
    let area = polygon_signed_area(verts);
    let n = verts.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let cross = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    Point2::new(cx / (6.0 * area), cy / (6.0 * area))
}

/// Diameter (largest pairwise vertex distance) of a polygon.
pub fn polygon_diameter(verts: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            d = d.max((verts[i] - verts[j]).norm());
        }
    }
    d
}

/// Clip a convex polygon by the half-plane `{x : n·x <= c}`.
///
/// Returns the (possibly empty) clipped loop. Vertices exactly on the line
/// are kept; intersection points are inserted where edges cross it.
pub fn clip_convex_by_halfplane(verts: &[Point2], n: Vector2, c: f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(verts.len() + 2);
    let m = verts.len();
    for i in 0..m {
        let a = verts[i];
        let b = verts[(i + 1) % m];
        let da = n.x * a.x + n.y * a.y - c;
        let db = n.x * b.x + n.y * b.y - c;
        if da <= 0.0 {
            out.push(a);
        }
        if (da > 0.0) != (db > 0.0) && da != db {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box2 {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Box2 {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// The unit square `[0,1]^2`.
    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.x0, self.y0),
            Point2::new(self.x1, self.y0),
            Point2::new(self.x1, self.y1),
            Point2::new(self.x0, self.y1),
        ]
    }
}
