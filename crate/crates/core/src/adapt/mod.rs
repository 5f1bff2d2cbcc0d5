//! Marking, the two refinement rules and the adaptive loop.

mod bisection;

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eig::{solve_smallest, EigOptions};
use crate::estimator::{estimate, EstimatorReport};
use crate::mesh::{polygon_centroid, BoundaryTag, Point, PolyMesh};
use crate::vem::{assemble_with, AssemblyOptions, Material, StabilizationScaling};
use crate::{Error, Result};

pub use bisection::refine_fem;

/// Maximum strategy: every element with `η_E ≥ fraction · max η`.
pub fn mark(eta: &[f64], fraction: f64) -> Vec<usize> {
    let max = eta.iter().copied().fold(0.0, f64::max);
    let threshold = fraction * max;
    (0..eta.len()).filter(|&e| eta[e] >= threshold).collect()
}

/// Boundary tags of `mesh` keyed by unordered vertex pair.
pub(crate) fn boundary_tags(mesh: &PolyMesh) -> HashMap<(usize, usize), BoundaryTag> {
    mesh.edges()
        .iter()
        .filter(|e| e.is_boundary())
        .map(|e| {
            let [a, b] = e.vertices;
            ((a.min(b), a.max(b)), e.tag)
        })
        .collect()
}

/// Shared midpoint bookkeeping for both refinement rules: new vertices are
/// appended, and halves of a split boundary edge inherit its tag.
pub(crate) struct Splitter {
    pub vertices: Vec<Point>,
    midpoints: HashMap<(usize, usize), usize>,
    tags: HashMap<(usize, usize), BoundaryTag>,
}

impl Splitter {
    pub fn new(mesh: &PolyMesh) -> Self {
        Self {
            vertices: mesh.vertices().to_vec(),
            midpoints: HashMap::new(),
            tags: boundary_tags(mesh),
        }
    }

    pub fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let m = self.vertices.len();
        self.vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        self.midpoints.insert(key, m);
        if let Some(&tag) = self.tags.get(&key) {
            self.tags.insert((a.min(m), a.max(m)), tag);
            self.tags.insert((b.min(m), b.max(m)), tag);
        }
        m
    }

    pub fn existing_midpoint(&self, a: usize, b: usize) -> Option<usize> {
        self.midpoints.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn push_vertex(&mut self, p: Point) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    pub fn build(self, elements: Vec<Vec<usize>>) -> Result<PolyMesh> {
        let tags = self.tags;
        let mut missing = None;
        let mesh = PolyMesh::new(self.vertices, elements, |a, b| {
            tags.get(&(a.min(b), a.max(b))).copied().unwrap_or_else(|| {
                missing.get_or_insert((a, b));
                BoundaryTag::Neumann
            })
        })?;
        if let Some((a, b)) = missing {
            return Err(Error::Refinement {
                element: usize::MAX,
                reason: format!("refinement exposed new boundary edge ({a}, {b})"),
            });
        }
        Ok(mesh)
    }
}

/// Splits each marked `n`-gon into `n` quadrilaterals joining its area
/// centroid to the edge midpoints. Unmarked neighbours keep the midpoints of
/// shared edges as extra (collinear) vertices.
pub fn refine_vem(mesh: &PolyMesh, marked: &[usize]) -> Result<PolyMesh> {
    let mut is_marked = vec![false; mesh.num_elements()];
    for &e in marked {
        if e >= mesh.num_elements() {
            return Err(Error::InvalidParameter(format!("marked element {e} does not exist")));
        }
        is_marked[e] = true;
    }
    let mut splitter = Splitter::new(mesh);
    let mut centers = vec![None; mesh.num_elements()];
    for (e, cycle) in mesh.elements().iter().enumerate() {
        if !is_marked[e] {
            continue;
        }
        let points = mesh.element_points(e);
        let c = polygon_centroid(&points);
        let n = points.len();
        let scale = crate::mesh::polygon_diameter(&points).powi(2);
        let star = (0..n).all(|i| {
            let (p, q) = (points[i], points[(i + 1) % n]);
            (p[0] - c[0]) * (q[1] - c[1]) - (q[0] - c[0]) * (p[1] - c[1]) > 1e-12 * scale
        });
        if !star {
            return Err(Error::Refinement {
                element: e,
                reason: "not star-shaped with respect to its barycenter".into(),
            });
        }
        for i in 0..n {
            splitter.midpoint(cycle[i], cycle[(i + 1) % n]);
        }
        centers[e] = Some(c);
    }
    let mut elements = Vec::with_capacity(mesh.num_elements() + 4 * marked.len());
    for (e, cycle) in mesh.elements().iter().enumerate() {
        let n = cycle.len();
        match centers[e] {
            Some(c) => {
                let center = splitter.push_vertex(c);
                for i in 0..n {
                    let prev = splitter.existing_midpoint(cycle[(i + n - 1) % n], cycle[i]).unwrap();
                    let next = splitter.existing_midpoint(cycle[i], cycle[(i + 1) % n]).unwrap();
                    elements.push(vec![cycle[i], next, center, prev]);
                }
            }
            None => {
                let mut grown = Vec::with_capacity(n + 2);
                for i in 0..n {
                    grown.push(cycle[i]);
                    if let Some(m) = splitter.existing_midpoint(cycle[i], cycle[(i + 1) % n]) {
                        grown.push(m);
                    }
                }
                elements.push(grown);
            }
        }
    }
    splitter.build(elements)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Polygon splitting of marked elements.
    #[serde(rename = "adaptive-vem")]
    Vem,
    /// Newest-vertex bisection of marked triangles.
    #[serde(rename = "adaptive-fem")]
    Fem,
    /// Every triangle bisected twice per step.
    Uniform,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Self::Vem => "adaptive-vem",
            Self::Fem => "adaptive-fem",
            Self::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive-vem" | "vem" => Ok(Self::Vem),
            "adaptive-fem" | "fem" => Ok(Self::Fem),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub strategy: Strategy,
    pub material: Material,
    pub mark_fraction: f64,
    /// Stop before solving a mesh with more degrees of freedom than this.
    pub max_dofs: usize,
    pub eta_floor: f64,
    pub max_steps: usize,
    /// Exact `ω₁`, for errors and effectivity.
    pub reference_omega: Option<f64>,
    pub scaling: StabilizationScaling,
    pub eig: EigOptions,
}

impl AdaptiveConfig {
    pub fn new(strategy: Strategy, material: Material) -> Self {
        Self {
            strategy,
            material,
            mark_fraction: 0.5,
            max_dofs: 25_000,
            eta_floor: 0.0,
            max_steps: 100,
            reference_omega: None,
            scaling: StabilizationScaling::default(),
            eig: EigOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveStep {
    pub step: usize,
    pub dofs: usize,
    pub elements: usize,
    pub omega: f64,
    pub error: Option<f64>,
    pub theta2: f64,
    pub r2: f64,
    pub j2: f64,
    pub eta2: f64,
    pub effectivity: Option<f64>,
    pub marked: Vec<usize>,
    /// Seconds spent on this step. Not serialized, so reports stay
    /// byte-stable.
    #[serde(skip)]
    pub wall_time: f64,
}

impl AdaptiveStep {
    fn new(step: usize, dofs: usize, elements: usize, omega: f64, reference: Option<f64>, report: &EstimatorReport) -> Self {
        Self {
            step,
            dofs,
            elements,
            omega,
            error: reference.map(|r| (r - omega).abs()),
            theta2: report.theta2,
            r2: report.r2,
            j2: report.j2,
            eta2: report.eta2,
            effectivity: report.effectivity,
            marked: Vec::new(),
            wall_time: 0.0,
        }
    }
}

/// One solve/estimate pass on a mesh: `(N, ω_h1, report)`.
pub fn solve_and_estimate(
    mesh: &PolyMesh,
    config: &AdaptiveConfig,
) -> Result<(usize, f64, EstimatorReport)> {
    let options = AssemblyOptions {
        scaling: config.scaling,
        dump_dir: None,
    };
    let system = assemble_with(mesh, &config.material, &options)?;
    let eig = config.eig.clone().with_normalization(config.material.density);
    let solution = solve_smallest(&system.stiffness, &system.mass, 1, &eig)?;
    let (Some(&lambda), Some(w)) = (solution.eigenvalues.first(), solution.eigenvectors.first()) else {
        return Err(Error::InvalidMesh("mesh has no free degrees of freedom".into()));
    };
    let report = estimate(
        mesh,
        &config.material,
        config.scaling,
        &system.dof_map,
        lambda,
        w,
        config.reference_omega,
    )?;
    Ok((system.num_dofs(), lambda.sqrt(), report))
}

/// Refines `marked` elements the way `strategy` does; uniform ignores the marks.
pub fn refine(mesh: &PolyMesh, strategy: Strategy, marked: &[usize]) -> Result<PolyMesh> {
    match strategy {
        Strategy::Vem => refine_vem(mesh, marked),
        Strategy::Fem => refine_fem(mesh, marked),
        Strategy::Uniform => {
            let all: Vec<usize> = (0..mesh.num_elements()).collect();
            let once = refine_fem(mesh, &all)?;
            let all: Vec<usize> = (0..once.num_elements()).collect();
            refine_fem(&once, &all)
        }
    }
}

/// Runs solve → estimate → mark → refine from `initial`, calling `observe`
/// after each recorded step.
pub fn adaptive_loop_with(
    initial: PolyMesh,
    config: &AdaptiveConfig,
    mut observe: impl FnMut(&AdaptiveStep, &PolyMesh),
) -> Result<Vec<AdaptiveStep>> {
    if !(config.mark_fraction >= 0.0 && config.mark_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mark fraction {} outside [0, 1]",
            config.mark_fraction
        )));
    }
    let mut mesh = initial;
    let mut steps: Vec<AdaptiveStep> = Vec::new();
    let with_step = |step: usize| move |source: Error| Error::Step {
        step,
        source: Box::new(source),
    };
    loop {
        let index = steps.len();
        let started = Instant::now();
        let (dofs, omega, report) = solve_and_estimate(&mesh, config).map_err(with_step(index))?;
        let mut record = AdaptiveStep::new(index, dofs, mesh.num_elements(), omega, config.reference_omega, &report);
        let done = dofs >= config.max_dofs || report.eta() <= config.eta_floor || index + 1 >= config.max_steps;
        let next = if done {
            None
        } else {
            record.marked = match config.strategy {
                Strategy::Uniform => (0..mesh.num_elements()).collect(),
                _ => mark(&report.element_eta(), config.mark_fraction),
            };
            Some(refine(&mesh, config.strategy, &record.marked).map_err(with_step(index))?)
        };
        record.wall_time = started.elapsed().as_secs_f64();
        observe(&record, &mesh);
        steps.push(record);
        match next {
            Some(refined) => {
                // Peek at the size without assembling.
                let free = refined.dirichlet_vertices().iter().filter(|&&f| !f).count();
                if 2 * free > config.max_dofs {
                    break;
                }
                mesh = refined;
            }
            None => break,
        }
    }
    Ok(steps)
}

pub fn adaptive_loop(initial: PolyMesh, config: &AdaptiveConfig) -> Result<Vec<AdaptiveStep>> {
    adaptive_loop_with(initial, config, |_, _| {})
}
