//! Polygonal meshes.
//!
//! A [`PolyMesh`] stores vertex coordinates, counter-clockwise element cycles
//! and the derived edge table. Boundary edges carry a [`BoundaryTag`] telling
//! whether the solid is clamped (`Dirichlet`) or traction free (`Neumann`)
//! there. Meshes are validated on construction and immutable afterwards.

mod generators;
mod geometry;
mod io;
mod regularity;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use generators::{
    generate_hexagonal_mesh, generate_trapezoidal_mesh, generate_triangle_mesh, generate_vessel_mesh,
    generate_vessel_mesh_with, VesselDirichlet,
};
pub use geometry::{
    element_geometry, polygon_area, polygon_centroid, polygon_diameter, ElementGeometry,
    GeomCache,
};
pub use io::MeshFile;
pub use regularity::{
    check_assumptions, polygon_kernel, star_center, subtriangulate, ElementRegularity,
    RegularityReport,
};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// A mesh edge. `elements.1` is `None` exactly for boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub elements: (usize, Option<usize>),
    pub tag: BoundaryTag,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// `element_edges[e][i]` joins `elements[e][i]` and `elements[e][i + 1]`.
    element_edges: Vec<Vec<usize>>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl PolyMesh {
    /// Builds and validates a mesh. `boundary_tag` is queried once for every
    /// boundary edge (with its vertices in the owning element's orientation)
    /// and must not answer `Interior`.
    pub fn new(
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        mut boundary_tag: impl FnMut(usize, usize) -> BoundaryTag,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidMesh("mesh has no elements".into()));
        }
        let mut used = vec![false; vertices.len()];
        for (e, cycle) in elements.iter().enumerate() {
            if cycle.len() < 3 {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has {} vertices",
                    cycle.len()
                )));
            }
            for &v in cycle {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references missing vertex {v}"
                    )));
                }
                used[v] = true;
            }
            let mut distinct = cycle.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != cycle.len() {
                return Err(Error::InvalidMesh(format!("element {e} repeats a vertex")));
            }
            let pts: Vec<Point> = cycle.iter().map(|&v| vertices[v]).collect();
            let area = polygon_area(&pts);
            if !(area > 0.0) {
                return Err(Error::DegenerateElement {
                    element: e,
                    reason: format!("signed area {area:e} is not positive"),
                });
            }
            if !geometry::is_simple(&pts) {
                return Err(Error::InvalidMesh(format!("element {e} is self-intersecting")));
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no element")));
        }
        check_duplicate_vertices(&vertices)?;

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut element_edges = Vec::with_capacity(elements.len());
        for (e, cycle) in elements.iter().enumerate() {
            let n = cycle.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cycle[i], cycle[(i + 1) % n]);
                let id = match index.get(&edge_key(a, b)) {
                    Some(&id) => {
                        let edge = &mut edges[id];
                        if edge.elements.1.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({a}, {b}) is shared by more than two elements"
                            )));
                        }
                        if edge.vertices != [b, a] {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({a}, {b}) is traversed twice in the same direction"
                            )));
                        }
                        edge.elements.1 = Some(e);
                        edge.tag = BoundaryTag::Interior;
                        id
                    }
                    None => {
                        let id = edges.len();
                        index.insert(edge_key(a, b), id);
                        edges.push(Edge {
                            vertices: [a, b],
                            elements: (e, None),
                            tag: BoundaryTag::Neumann,
                        });
                        id
                    }
                };
                local.push(id);
            }
            element_edges.push(local);
        }
        for edge in edges.iter_mut().filter(|edge| edge.is_boundary()) {
            let [a, b] = edge.vertices;
            edge.tag = boundary_tag(a, b);
            if edge.tag == BoundaryTag::Interior {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge ({a}, {b}) tagged interior"
                )));
            }
        }
        Ok(Self {
            vertices,
            elements,
            edges,
            element_edges,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e]
    }

    /// Edge ids of element `e`, aligned with its vertex cycle.
    pub fn element_edges(&self, e: usize) -> &[usize] {
        &self.element_edges[e]
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Linear scan over the edge table.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|edge| edge_key(edge.vertices[0], edge.vertices[1]) == edge_key(a, b))
    }

    /// `true` for vertices on the closure of the Dirichlet boundary.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut fixed = vec![false; self.vertices.len()];
        for edge in self.edges.iter().filter(|e| e.tag == BoundaryTag::Dirichlet) {
            fixed[edge.vertices[0]] = true;
            fixed[edge.vertices[1]] = true;
        }
        fixed
    }

    pub fn is_all_triangles(&self) -> bool {
        self.elements.iter().all(|c| c.len() == 3)
    }

    /// Diagonal of the bounding box.
    pub fn domain_diameter(&self) -> f64 {
        bounding_diagonal(&self.vertices)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| polygon_area(&self.element_points(e)))
            .sum()
    }

    /// Geometry of every element.
    pub fn geometry(&self) -> Result<GeomCache> {
        (0..self.num_elements())
            .map(|e| element_geometry(self, e))
            .collect::<Result<Vec<_>>>()
            .map(GeomCache::new)
    }

    /// Outward unit normal of edge `edge` as seen from element `e`.
    pub fn outward_normal(&self, edge: usize, e: usize) -> Point {
        let [a, b] = self.edges[edge].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = dx.hypot(dy);
        // Stored orientation follows the first owner's counter-clockwise cycle.
        let sign = if self.edges[edge].elements.0 == e { 1.0 } else { -1.0 };
        [sign * dy / len, -sign * dx / len]
    }
}

fn bounding_diagonal(points: &[Point]) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}

fn check_duplicate_vertices(vertices: &[Point]) -> Result<()> {
    let tol = 1e-12 * bounding_diagonal(vertices);
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| vertices[a][0].total_cmp(&vertices[b][0]));
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if vertices[b][0] - vertices[a][0] > tol {
                break;
            }
            let d = (vertices[b][0] - vertices[a][0]).hypot(vertices[b][1] - vertices[a][1]);
            if d <= tol {
                return Err(Error::InvalidMesh(format!(
                    "vertices {a} and {b} coincide"
                )));
            }
        }
    }
    Ok(())
}
