//! Mesh families used by the benchmark problems.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoundaryTag, Point, PolyMesh};
use crate::{Error, Result};

/// Unit square split into `n x n` congruent trapezoids with the midpoint of
/// every edge added as a vertex, so each element is an octagon with collinear
/// triples. Bottom side clamped, the rest traction free.
///
/// Vertical grid lines with odd index are shifted by `±1/(4n)` with the sign
/// alternating per row; for even `n` every cell is congruent to the
/// trapezoid `(0,0), (3/4,0), (5/4,1), (0,1)` scaled by `1/n` (up to
/// reflection).
pub fn generate_trapezoidal_mesh(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("trapezoidal mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let shift = 0.25 * h;
    let grid = |i: usize, j: usize| -> Point {
        let mut x = i as f64 * h;
        if i % 2 == 1 && i < n {
            x += if j.is_multiple_of(2) { -shift } else { shift };
        }
        [x, j as f64 * h]
    };
    let node = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices: Vec<Point> = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(grid(i, j));
        }
    }
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut elements = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let corners = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)];
            let mut cycle = Vec::with_capacity(8);
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                cycle.push(a);
                cycle.push(midpoint(a, b, &mut vertices));
            }
            elements.push(cycle);
        }
    }
    let bottom = |v: Point| v[1] == 0.0;
    let tags: Vec<Point> = vertices.clone();
    PolyMesh::new(vertices, elements, |a, b| {
        if bottom(tags[a]) && bottom(tags[b]) {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    })
}

/// Unit square split into `n x n` cells, each cut along its rising diagonal.
/// Cycles list the vertex opposite the diagonal first, so the diagonal is the
/// bisection edge. Bottom side clamped.
pub fn generate_triangle_mesh(n: usize) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("triangle mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let node = |i: usize, j: usize| j * (n + 1) + i;
    let vertices: Vec<Point> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| [i as f64 * h, j as f64 * h]))
        .collect();
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
            elements.push(vec![b, c, a]);
            elements.push(vec![d, a, c]);
        }
    }
    let tags = vertices.clone();
    PolyMesh::new(vertices, elements, |a, b| {
        if tags[a][1] == 0.0 && tags[b][1] == 0.0 {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    })
}

/// Convex hexagons in a staggered brick layout over the unit square, about
/// `n` elements per side. Interior vertices get a seeded random perturbation
/// so the mesh is unstructured yet reproducible. Boundary rows degenerate to
/// pentagons and quadrilaterals. Bottom side clamped.
pub fn generate_hexagonal_mesh(n: usize) -> Result<PolyMesh> {
    generate_hexagonal_mesh_seeded(n, 0x5eed_0000 + n as u64)
}

pub(crate) fn generate_hexagonal_mesh_seeded(n: usize, seed: u64) -> Result<PolyMesh> {
    if n < 2 {
        return Err(Error::InvalidParameter("hexagonal mesh needs n >= 2".into()));
    }
    let h = 1.0 / n as f64;
    let lift = h / 6.0;
    let jitter = 0.05 * h;
    let cols = 2 * n + 1;
    let id = |k: usize, j: usize| j * cols + k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(cols * (n + 1));
    for j in 0..=n {
        for k in 0..cols {
            let mut p = [k as f64 * 0.5 * h, j as f64 * h];
            if j > 0 && j < n {
                p[1] += if (k + j) % 2 == 0 { lift } else { -lift };
                if k > 0 && k < cols - 1 {
                    p[0] += rng.random_range(-jitter..jitter);
                    p[1] += rng.random_range(-jitter..jitter);
                }
            }
            points.push(p);
        }
    }
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        // Bricks in row j have corners at columns k, k + 2 with k + j even.
        let mut k: isize = if j % 2 == 0 { 0 } else { -1 };
        while k < (cols - 1) as isize {
            let cycle: Vec<usize> = if k < 0 {
                vec![id(0, j), id(1, j), id(1, j + 1), id(0, j + 1)]
            } else {
                let k = k as usize;
                if k + 2 > cols - 1 {
                    vec![id(k, j), id(k + 1, j), id(k + 1, j + 1), id(k, j + 1)]
                } else {
                    vec![
                        id(k, j),
                        id(k + 1, j),
                        id(k + 2, j),
                        id(k + 2, j + 1),
                        id(k + 1, j + 1),
                        id(k, j + 1),
                    ]
                }
            };
            cells.push(cycle);
            k += 2;
        }
    }
    // Drop the collinear brick midpoints left on the top and bottom sides.
    let mut uses = vec![0usize; points.len()];
    for c in &cells {
        for &v in c {
            uses[v] += 1;
        }
    }
    let removable = |v: usize| {
        let (k, j) = (v % cols, v / cols);
        (j == 0 || j == n) && k > 0 && k < cols - 1 && uses[v] == 1
    };
    let mut remap = vec![usize::MAX; points.len()];
    let mut vertices = Vec::new();
    for v in 0..points.len() {
        if uses[v] > 0 && !removable(v) {
            remap[v] = vertices.len();
            vertices.push(points[v]);
        }
    }
    let elements: Vec<Vec<usize>> = cells
        .iter()
        .map(|c| c.iter().filter(|&&v| remap[v] != usize::MAX).map(|&v| remap[v]).collect())
        .collect();
    let coords = vertices.clone();
    PolyMesh::new(vertices, elements, |a, b| {
        if coords[a][1] == 0.0 && coords[b][1] == 0.0 {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    })
}

/// Which part of the vessel boundary is clamped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VesselDirichlet {
    /// The bottom side `y = -0.75` of the outer square.
    #[default]
    OuterBottom,
    /// The whole outer square; the inner square stays free.
    OuterBoundary,
}

pub const VESSEL_OUTER: f64 = 0.75;
pub const VESSEL_INNER: f64 = 0.5;

/// Coarse triangulation of the square annulus
/// `[-0.75, 0.75]^2 \ [-0.5, 0.5]^2` with the default clamping.
pub fn generate_vessel_mesh() -> Result<PolyMesh> {
    generate_vessel_mesh_with(VesselDirichlet::default())
}

/// Grid lines of the coarse vessel triangulation: two cell layers across the
/// wall thickness, coarser spans along the hole.
const VESSEL_X: [f64; 10] = [-0.75, -0.625, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.625, 0.75];
const VESSEL_Y: [f64; 9] = [-0.75, -0.625, -0.5, -0.25, 0.0, 0.25, 0.5, 0.625, 0.75];

pub fn generate_vessel_mesh_with(dirichlet: VesselDirichlet) -> Result<PolyMesh> {
    let inside_hole = |x: f64, y: f64| x.abs() < VESSEL_INNER && y.abs() < VESSEL_INNER;
    let (nx, ny) = (VESSEL_X.len(), VESSEL_Y.len());
    let mut index = vec![usize::MAX; nx * ny];
    let mut vertices = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !inside_hole(VESSEL_X[i], VESSEL_Y[j]) {
                index[j * nx + i] = vertices.len();
                vertices.push([VESSEL_X[i], VESSEL_Y[j]]);
            }
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let cx = 0.5 * (VESSEL_X[i] + VESSEL_X[i + 1]);
            let cy = 0.5 * (VESSEL_Y[j] + VESSEL_Y[j + 1]);
            if inside_hole(cx, cy) {
                continue;
            }
            let (a, b, c, d) = (
                index[j * nx + i],
                index[j * nx + i + 1],
                index[(j + 1) * nx + i + 1],
                index[(j + 1) * nx + i],
            );
            // Diagonals alternate so the pattern is symmetric about both
            // axes. Each triangle starts at its right-angle vertex, the
            // newest-vertex convention used by bisection refinement.
            if (i + j) % 2 == 0 {
                elements.push(vec![b, c, a]);
                elements.push(vec![d, a, c]);
            } else {
                elements.push(vec![a, b, d]);
                elements.push(vec![c, d, b]);
            }
        }
    }
    let coords = vertices.clone();
    let on_outer = |p: Point| p[0].abs() == VESSEL_OUTER || p[1].abs() == VESSEL_OUTER;
    let on_bottom = |p: Point| p[1] == -VESSEL_OUTER;
    PolyMesh::new(vertices, elements, |a, b| {
        let (p, q) = (coords[a], coords[b]);
        let clamped = match dirichlet {
            VesselDirichlet::OuterBottom => on_bottom(p) && on_bottom(q),
            VesselDirichlet::OuterBoundary => on_outer(p) && on_outer(q),
        };
        if clamped {
            BoundaryTag::Dirichlet
        } else {
            BoundaryTag::Neumann
        }
    })
}
