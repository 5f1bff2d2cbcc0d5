use super::{Point, PolyMesh};
use crate::{Error, Result};

/// Signed shoelace area; positive for counter-clockwise polygons.
///
/// Accumulated relative to the first vertex: in absolute coordinates the
/// cross products cancel to `eps |x|² / |E|` relative error, which matters
/// for small elements far from the origin.
pub fn polygon_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let o = points[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        let (p, q) = (points[i], points[i + 1]);
        twice += (p[0] - o[0]) * (q[1] - o[1]) - (q[0] - o[0]) * (p[1] - o[1]);
    }
    0.5 * twice
}

/// Area centroid of a simple polygon. Coordinates are shifted to the first
/// vertex before accumulation to limit cancellation.
pub fn polygon_centroid(points: &[Point]) -> Point {
    let n = points.len();
    let o = points[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = [points[i][0] - o[0], points[i][1] - o[1]];
        let q = [points[(i + 1) % n][0] - o[0], points[(i + 1) % n][1] - o[1]];
        let cross = p[0] * q[1] - q[0] * p[1];
        a += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

/// Largest pairwise vertex distance.
pub fn polygon_diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((q[0] - p[0]).hypot(q[1] - p[1]));
        }
    }
    d
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// No two non-adjacent edges of the cycle cross.
pub(crate) fn is_simple(points: &[Point]) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub diameter: f64,
    pub centroid: Point,
    pub edge_lengths: Vec<f64>,
}

impl ElementGeometry {
    pub fn from_points(points: &[Point]) -> Self {
        let n = points.len();
        let edge_lengths = (0..n)
            .map(|i| {
                let (p, q) = (points[i], points[(i + 1) % n]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .collect();
        Self {
            area: polygon_area(points),
            diameter: polygon_diameter(points),
            centroid: polygon_centroid(points),
            edge_lengths,
        }
    }

    pub fn min_edge(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn element_geometry(mesh: &PolyMesh, e: usize) -> Result<ElementGeometry> {
    if e >= mesh.num_elements() {
        return Err(Error::InvalidParameter(format!("no element {e}")));
    }
    let geom = ElementGeometry::from_points(&mesh.element_points(e));
    if !(geom.area > 0.0) {
        return Err(Error::DegenerateElement {
            element: e,
            reason: format!("area {:e}", geom.area),
        });
    }
    Ok(geom)
}

/// Per-element geometry plus the global mesh size `h = max h_E`.
#[derive(Debug, Clone)]
pub struct GeomCache {
    pub elements: Vec<ElementGeometry>,
    pub h: f64,
}

impl GeomCache {
    pub fn new(elements: Vec<ElementGeometry>) -> Self {
        let h = elements.iter().map(|g| g.diameter).fold(0.0, f64::max);
        Self { elements, h }
    }
}
