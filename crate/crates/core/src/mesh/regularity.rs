//! Shape-regularity checks and star-centered sub-triangulation.
//!
//! The kernel of a polygon (the set of points it is star-shaped with respect
//! to) is the intersection of the inner half-planes of its edges. A ball of
//! radius `r` fits in the kernel iff the polygon is star-shaped with respect
//! to every point of that ball, so the second regularity condition reduces to
//! the Chebyshev radius of the kernel.

use super::{polygon_area, ElementGeometry, Point, PolyMesh};
use crate::{Error, Result};

/// Clips the convex polygon `poly` to the half-plane left of the directed
/// line `a -> b`.
fn clip_left(poly: &[Point], a: Point, b: Point) -> Vec<Point> {
    let side = |p: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Kernel of a counter-clockwise simple polygon as a convex polygon; empty
/// when the polygon is not star-shaped.
pub fn polygon_kernel(points: &[Point]) -> Vec<Point> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut kernel = vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    let n = points.len();
    for i in 0..n {
        kernel = clip_left(&kernel, points[i], points[(i + 1) % n]);
        if kernel.len() < 3 {
            return Vec::new();
        }
    }
    let scale = super::polygon_diameter(points).powi(2);
    if polygon_area(&kernel) <= 1e-14 * scale {
        return Vec::new();
    }
    kernel
}

/// Center and radius of the largest disk inside a convex counter-clockwise
/// polygon. The optimum of this 3-variable linear program sits where three
/// edge lines are active, so every triple is tried.
fn chebyshev_center(convex: &[Point]) -> Option<(Point, f64)> {
    let n = convex.len();
    // Lines as a·x <= b with |a| = 1.
    let lines: Vec<([f64; 2], f64)> = (0..n)
        .filter_map(|i| {
            let (p, q) = (convex[i], convex[(i + 1) % n]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = dx.hypot(dy);
            (len > 0.0).then(|| {
                let a = [dy / len, -dx / len];
                (a, a[0] * p[0] + a[1] * p[1])
            })
        })
        .collect();
    let scale = super::polygon_diameter(convex);
    let mut best: Option<(Point, f64)> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            for k in j + 1..lines.len() {
                let rows = [lines[i], lines[j], lines[k]];
                let Some((x, r)) = solve_tangent_circle(&rows) else {
                    continue;
                };
                let feasible = lines
                    .iter()
                    .all(|(a, b)| a[0] * x[0] + a[1] * x[1] + r <= b + 1e-12 * scale);
                if feasible && best.is_none_or(|(_, rb)| r > rb) {
                    best = Some((x, r));
                }
            }
        }
    }
    best
}

fn solve_tangent_circle(rows: &[([f64; 2], f64); 3]) -> Option<(Point, f64)> {
    // Cramer's rule on [a_x a_y 1] [x y r]^T = b.
    let m = |r: usize, c: usize| match c {
        0 => rows[r].0[0],
        1 => rows[r].0[1],
        _ => 1.0,
    };
    let det3 = |col: Option<usize>| {
        let g = |r: usize, c: usize| {
            if Some(c) == col {
                rows[r].1
            } else {
                m(r, c)
            }
        };
        g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
            - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
    };
    let d = det3(None);
    if d.abs() < 1e-12 {
        return None;
    }
    Some(([det3(Some(0)) / d, det3(Some(1)) / d], det3(Some(2)) / d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementRegularity {
    /// Shortest edge over diameter.
    pub edge_ratio: f64,
    /// Radius of the largest disk in the kernel, over diameter.
    pub star_ratio: f64,
    pub star_center: Option<Point>,
    pub a1: bool,
    pub a2: bool,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub constant: f64,
    pub elements: Vec<ElementRegularity>,
}

impl RegularityReport {
    pub fn all_a1(&self) -> bool {
        self.elements.iter().all(|r| r.a1)
    }

    pub fn all_a2(&self) -> bool {
        self.elements.iter().all(|r| r.a2)
    }

    pub fn min_edge_ratio(&self) -> f64 {
        self.elements.iter().map(|r| r.edge_ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn min_star_ratio(&self) -> f64 {
        self.elements.iter().map(|r| r.star_ratio).fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn element_regularity(points: &[Point], constant: f64) -> ElementRegularity {
    let geom = ElementGeometry::from_points(points);
    let edge_ratio = geom.min_edge() / geom.diameter;
    let kernel = polygon_kernel(points);
    let (star_center, radius) = match chebyshev_center(&kernel) {
        Some((c, r)) if r > 0.0 => (Some(c), r),
        _ => (None, 0.0),
    };
    let star_ratio = radius / geom.diameter;
    ElementRegularity {
        edge_ratio,
        star_ratio,
        star_center,
        a1: edge_ratio >= constant,
        a2: star_ratio >= constant,
    }
}

pub fn check_assumptions(mesh: &PolyMesh, constant: f64) -> Result<RegularityReport> {
    if !(constant > 0.0 && constant < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "regularity constant {constant} outside (0, 1)"
        )));
    }
    let elements = (0..mesh.num_elements())
        .map(|e| element_regularity(&mesh.element_points(e), constant))
        .collect();
    Ok(RegularityReport { constant, elements })
}

/// Is every fan triangle around `c` positively oriented?
fn fans_from(points: &[Point], c: Point) -> bool {
    let n = points.len();
    let scale = super::polygon_diameter(points).powi(2);
    (0..n).all(|i| {
        let (p, q) = (points[i], points[(i + 1) % n]);
        let twice = (p[0] - c[0]) * (q[1] - c[1]) - (q[0] - c[0]) * (p[1] - c[1]);
        twice > 1e-13 * scale
    })
}

/// A point the polygon is star-shaped with respect to: the centroid when it
/// qualifies, otherwise the Chebyshev center of the kernel.
pub fn star_center(points: &[Point]) -> Option<Point> {
    let centroid = super::polygon_centroid(points);
    if fans_from(points, centroid) {
        return Some(centroid);
    }
    let (c, _) = chebyshev_center(&polygon_kernel(points))?;
    fans_from(points, c).then_some(c)
}

pub(crate) fn fan_triangles(points: &[Point], center: Point) -> Vec<[Point; 3]> {
    let n = points.len();
    (0..n).map(|i| [center, points[i], points[(i + 1) % n]]).collect()
}

/// Triangles joining each edge of element `e` to its star center.
pub fn subtriangulate(mesh: &PolyMesh, e: usize) -> Result<Vec<[Point; 3]>> {
    let points = mesh.element_points(e);
    let center = star_center(&points).ok_or(Error::StarCenter(e))?;
    Ok(fan_triangles(&points, center))
}
