//! WebAssembly front end for the browser demo in `www/`.
//!
//! Two operations are exposed: [`modes`] meshes a domain and returns the
//! lowest vibration modes, and [`AdaptiveSession`] runs the adaptive loop one
//! solve/estimate/refine step per call. Everything crosses the boundary as
//! JSON strings; the plain-Rust functions underneath ([`compute_modes`],
//! [`Session`]) are what the native tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use vem_spectra::adapt::{mark, refine, solve_and_estimate, AdaptiveConfig, Strategy};
use vem_spectra::eig::{solve_smallest, EigOptions};
use vem_spectra::experiment::{MaterialParams, MeshFamily};
use vem_spectra::mesh::{generate_vessel_mesh, Point, PolyMesh};
use vem_spectra::vem::{assemble, Material};
use vem_spectra::{Error, Result};

/// Largest `n` accepted for square meshes; keeps a solve interactive.
pub const MAX_SIDE: usize = 48;
/// The adaptive session refuses to refine beyond this many unknowns.
pub const MAX_SESSION_DOFS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshView {
    pub vertices: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    /// Per vertex: clamped or free.
    pub clamped: Vec<bool>,
}

impl MeshView {
    pub fn new(mesh: &PolyMesh) -> Self {
        Self {
            vertices: mesh.vertices().to_vec(),
            elements: mesh.elements().to_vec(),
            clamped: mesh.dirichlet_vertices(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModesView {
    pub mesh: MeshView,
    pub dofs: usize,
    pub frequencies: Vec<f64>,
    /// Per mode, per vertex displacement scaled to unit maximum magnitude.
    pub shapes: Vec<Vec<[f64; 2]>>,
}

/// `"vessel"` or a square family name; square sizes are capped at
/// [`MAX_SIDE`].
pub fn domain_mesh(domain: &str, n: usize) -> Result<(PolyMesh, Material)> {
    if domain == "vessel" {
        return Ok((generate_vessel_mesh()?, MaterialParams::UNIT.material()?));
    }
    let family: MeshFamily = domain.parse()?;
    if n == 0 || n > MAX_SIDE {
        return Err(Error::InvalidParameter(format!("n must lie in 1..={MAX_SIDE}, got {n}")));
    }
    Ok((family.generate(n)?, MaterialParams::STEEL.material()?))
}

pub fn compute_modes(domain: &str, n: usize, count: usize) -> Result<ModesView> {
    if count == 0 || count > 12 {
        return Err(Error::InvalidParameter(format!("mode count must lie in 1..=12, got {count}")));
    }
    let (mesh, material) = domain_mesh(domain, n)?;
    let system = assemble(&mesh, &material)?;
    let solution = solve_smallest(&system.stiffness, &system.mass, count, &EigOptions::default())?;
    let shapes = solution
        .eigenvectors
        .iter()
        .map(|w| {
            let u = system.dof_map.expand(w);
            let peak = u.iter().map(|d| d[0].hypot(d[1])).fold(0.0, f64::max);
            let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
            u.into_iter().map(|d| [d[0] * scale, d[1] * scale]).collect()
        })
        .collect();
    Ok(ModesView {
        mesh: MeshView::new(&mesh),
        dofs: system.num_dofs(),
        frequencies: solution.frequencies()?,
        shapes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepView {
    pub step: usize,
    pub mesh: MeshView,
    pub dofs: usize,
    pub omega: f64,
    pub error: Option<f64>,
    pub eta2: f64,
    pub effectivity: Option<f64>,
    /// Per-element `η_E`.
    pub eta: Vec<f64>,
    /// Elements the next call refines.
    pub marked: Vec<usize>,
}

/// The vessel adaptive loop, advanced one step per [`Session::advance`].
#[derive(Debug, Clone)]
pub struct Session {
    mesh: PolyMesh,
    config: AdaptiveConfig,
    pending: Option<Vec<usize>>,
    step: usize,
}

impl Session {
    pub fn new(strategy: Strategy, reference: Option<f64>) -> Result<Self> {
        let mut config = AdaptiveConfig::new(strategy, MaterialParams::UNIT.material()?);
        config.reference_omega = reference;
        Ok(Self {
            mesh: generate_vessel_mesh()?,
            config,
            pending: None,
            step: 0,
        })
    }

    /// Refines with the marks of the previous step (if any), then solves and
    /// estimates on the new mesh.
    pub fn advance(&mut self) -> Result<StepView> {
        if let Some(marked) = self.pending.take() {
            let refined = refine(&self.mesh, self.config.strategy, &marked)?;
            let free = refined.dirichlet_vertices().iter().filter(|f| !**f).count();
            if 2 * free > MAX_SESSION_DOFS {
                self.pending = Some(marked);
                return Err(Error::InvalidParameter(format!(
                    "next mesh has {} unknowns, above the demo limit {MAX_SESSION_DOFS}",
                    2 * free
                )));
            }
            self.mesh = refined;
            self.step += 1;
        }
        let (dofs, omega, report) = solve_and_estimate(&self.mesh, &self.config)?;
        let eta = report.element_eta();
        let marked = mark(&eta, self.config.mark_fraction);
        self.pending = Some(marked.clone());
        Ok(StepView {
            step: self.step,
            mesh: MeshView::new(&self.mesh),
            dofs,
            omega,
            error: self.config.reference_omega.map(|w| (w - omega).abs()),
            eta2: report.eta2,
            effectivity: report.effectivity,
            eta,
            marked,
        })
    }
}

/// JSON [`ModesView`] for `domain` (`trapezoid`, `hexagon`, `triangle` or
/// `vessel`).
#[wasm_bindgen]
pub fn modes(domain: &str, n: u32, count: u32) -> Result<String, JsError> {
    Ok(serde_json::to_string(&compute_modes(domain, n as usize, count as usize)?)?)
}

#[wasm_bindgen]
pub struct AdaptiveSession {
    inner: Session,
}

#[wasm_bindgen]
impl AdaptiveSession {
    /// `strategy` is `adaptive-vem`, `adaptive-fem` or `uniform`; a
    /// non-positive `reference` disables error reporting.
    #[wasm_bindgen(constructor)]
    pub fn new(strategy: &str, reference: f64) -> Result<AdaptiveSession, JsError> {
        let strategy: Strategy = strategy.parse()?;
        let reference = (reference > 0.0).then_some(reference);
        Ok(Self { inner: Session::new(strategy, reference)? })
    }

    /// JSON [`StepView`] of the next step.
    pub fn step(&mut self) -> Result<String, JsError> {
        Ok(serde_json::to_string(&self.inner.advance()?)?)
    }
}
