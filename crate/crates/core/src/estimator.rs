//! Residual a-posteriori indicators for a discrete eigenpair.
//!
//! For k = 1 every term only needs the element projections: the stress of
//! `Π w` is constant per element, so the divergence part of the volume
//! residual vanishes and edge jumps are constant vectors.

use serde::{Deserialize, Serialize};

use crate::mesh::{BoundaryTag, PolyMesh};
use crate::vem::{element_operators, DofMap, LocalOperators, Material, StabilizationScaling};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementIndicator {
    pub theta2: f64,
    pub r2: f64,
    pub j2: f64,
}

impl ElementIndicator {
    pub fn eta2(&self) -> f64 {
        self.theta2 + self.r2 + self.j2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub elements: Vec<ElementIndicator>,
    pub theta2: f64,
    pub r2: f64,
    pub j2: f64,
    pub eta2: f64,
    /// `|ω₁ - ω_h1| / η²` when a reference frequency was supplied.
    pub effectivity: Option<f64>,
}

impl EstimatorReport {
    pub fn eta(&self) -> f64 {
        self.eta2.sqrt()
    }

    /// Per-element `η_E`.
    pub fn element_eta(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.eta2().sqrt()).collect()
    }
}

/// `σ⁰‖(I - DΠ⁰)w‖² + σ‖(I - DΠ^∇)w‖²` over the vertex values.
pub fn theta_term(ops: &LocalOperators, local: &[f64]) -> f64 {
    // Π⁰ = Π^∇ for k = 1, so both remainders coincide.
    (ops.sigma + ops.sigma0) * ops.remainder_norm2(local)
}

/// `h_E² ‖λ ρ Π⁰w‖²_{0,E}`.
pub fn volume_residual(ops: &LocalOperators, local: &[f64], lambda: f64, material: &Material) -> f64 {
    let c = ops.project(local);
    // poly_mass is ρ-weighted, so cᵀ M̂ c = ρ ‖Πw‖².
    let weighted: f64 = (0..c.len())
        .map(|a| (0..c.len()).map(|b| c[a] * ops.poly_mass[(a, b)] * c[b]).sum::<f64>())
        .sum();
    ops.basis.h.powi(2) * lambda * lambda * material.density * weighted
}

/// Constant Voigt stress `C ε(Π w)` of an element.
pub fn element_stress(ops: &LocalOperators, local: &[f64], material: &Material) -> [f64; 3] {
    material.stress(ops.basis.strain_of(&ops.project(local)))
}

fn traction(stress: [f64; 3], n: [f64; 2]) -> [f64; 2] {
    [stress[0] * n[0] + stress[2] * n[1], stress[2] * n[0] + stress[1] * n[1]]
}

/// Per-edge jump vectors `J_ℓ` and per-element `Σ_{ℓ ⊂ ∂E} h_E |ℓ| |J_ℓ|²`.
///
/// Interior edges carry the mean traction mismatch `½(σ⁺n⁺ + σ⁻n⁻)`,
/// traction-free edges the full traction `-σn`, clamped edges nothing.
pub fn edge_jumps(mesh: &PolyMesh, stresses: &[[f64; 3]], diameters: &[f64]) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    if stresses.len() != mesh.num_elements() || diameters.len() != mesh.num_elements() {
        return Err(Error::InvalidMesh(format!(
            "{} stresses and {} diameters for {} elements",
            stresses.len(),
            diameters.len(),
            mesh.num_elements()
        )));
    }
    let mut jumps = Vec::with_capacity(mesh.edges().len());
    let mut per_element = vec![0.0; mesh.num_elements()];
    for (k, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
        let length = (q[0] - p[0]).hypot(q[1] - p[1]);
        let (owner, other) = edge.elements;
        let n = mesh.outward_normal(k, owner);
        let t_owner = traction(stresses[owner], n);
        let jump = match (edge.tag, other) {
            (BoundaryTag::Interior, Some(other)) => {
                let t_other = traction(stresses[other], [-n[0], -n[1]]);
                [0.5 * (t_owner[0] + t_other[0]), 0.5 * (t_owner[1] + t_other[1])]
            }
            (BoundaryTag::Neumann, None) => [-t_owner[0], -t_owner[1]],
            (BoundaryTag::Dirichlet, None) => [0.0, 0.0],
            (tag, other) => {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) tagged {tag:?} with neighbours ({owner}, {other:?})"
                )))
            }
        };
        let norm2 = length * (jump[0] * jump[0] + jump[1] * jump[1]);
        per_element[owner] += diameters[owner] * norm2;
        if let Some(other) = other {
            per_element[other] += diameters[other] * norm2;
        }
        jumps.push(jump);
    }
    Ok((jumps, per_element))
}

/// Aggregates per-element terms into the global report.
pub fn indicator(
    theta2: &[f64],
    r2: &[f64],
    j2: &[f64],
    frequencies: Option<(f64, f64)>,
) -> EstimatorReport {
    let elements: Vec<ElementIndicator> = theta2
        .iter()
        .zip(r2)
        .zip(j2)
        .map(|((&theta2, &r2), &j2)| ElementIndicator { theta2, r2, j2 })
        .collect();
    let theta2 = elements.iter().map(|e| e.theta2).sum();
    let r2 = elements.iter().map(|e| e.r2).sum();
    let j2 = elements.iter().map(|e| e.j2).sum();
    let eta2 = elements.iter().map(ElementIndicator::eta2).sum();
    let effectivity = frequencies.map(|(reference, computed)| (reference - computed).abs() / eta2);
    EstimatorReport {
        elements,
        theta2,
        r2,
        j2,
        eta2,
        effectivity,
    }
}

/// Full estimator for the eigenpair `(λ, w)`, `w` a global free-DOF vector
/// normalized so that `wᵀ B w = ρ`. `reference` is the exact `ω₁` if known.
pub fn estimate(
    mesh: &PolyMesh,
    material: &Material,
    scaling: StabilizationScaling,
    dof_map: &DofMap,
    lambda: f64,
    w: &[f64],
    reference: Option<f64>,
) -> Result<EstimatorReport> {
    if w.len() != dof_map.len() {
        return Err(Error::InvalidParameter(format!(
            "eigenvector has {} entries, expected {}",
            w.len(),
            dof_map.len()
        )));
    }
    estimate_field(mesh, material, scaling, &dof_map.expand(w), lambda, reference)
}

/// Same as [`estimate`] for a displacement given at every vertex.
pub fn estimate_field(
    mesh: &PolyMesh,
    material: &Material,
    scaling: StabilizationScaling,
    displacement: &[[f64; 2]],
    lambda: f64,
    reference: Option<f64>,
) -> Result<EstimatorReport> {
    if displacement.len() != mesh.num_vertices() {
        return Err(Error::InvalidParameter(format!(
            "{} vertex displacements for {} vertices",
            displacement.len(),
            mesh.num_vertices()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::NegativeEigenvalue(lambda));
    }
    let ops = element_operators(mesh, material, scaling)?;
    let mut theta2 = Vec::with_capacity(ops.len());
    let mut r2 = Vec::with_capacity(ops.len());
    let mut stresses = Vec::with_capacity(ops.len());
    let mut diameters = Vec::with_capacity(ops.len());
    for (cycle, op) in mesh.elements().iter().zip(&ops) {
        let local: Vec<f64> = cycle.iter().flat_map(|&v| displacement[v]).collect();
        theta2.push(theta_term(op, &local));
        r2.push(volume_residual(op, &local, lambda, material));
        stresses.push(element_stress(op, &local, material));
        diameters.push(op.basis.h);
    }
    let (_, j2) = edge_jumps(mesh, &stresses, &diameters)?;
    Ok(indicator(&theta2, &r2, &j2, reference.map(|r| (r, lambda.sqrt()))))
}
