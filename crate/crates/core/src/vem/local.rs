//! Element-level projector, consistency and stabilization matrices.
//!
//! Polynomials live in `[P1(E)]²` spanned by the scaled monomials
//! `m ∈ {1, ξ, η}`, `ξ = (x - x_E)/h_E`, `η = (y - y_E)/h_E`, times a unit
//! vector; basis index `2·m + c` puts monomial `m` in component `c`, which
//! interleaves the same way as the vertex degrees of freedom.
//!
//! For k = 1 every quantity the projector needs is available from vertex
//! values: the strain of a linear field is constant, so `a(p, v)` reduces to
//! a boundary integral of the traction of `p` against the piecewise linear
//! trace of `v`, which the edge trapezoid rule integrates exactly.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::Material;
use crate::mesh::{polygon_area, polygon_diameter, star_center, Point};
use crate::{Error, Result};

pub const POLY_DIM: usize = 6;

/// Scaled monomial basis of `[P1(E)]²` attached to one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyBasis {
    pub center: Point,
    pub h: f64,
}

impl PolyBasis {
    pub fn monomials(&self, p: Point) -> [f64; 3] {
        [
            1.0,
            (p[0] - self.center[0]) / self.h,
            (p[1] - self.center[1]) / self.h,
        ]
    }

    pub fn eval(&self, beta: usize, p: Point) -> [f64; 2] {
        let m = self.monomials(p)[beta / 2];
        let mut out = [0.0; 2];
        out[beta % 2] = m;
        out
    }

    /// Engineering strain `(ε_xx, ε_yy, γ_xy)` of basis member `beta`.
    pub fn strain(&self, beta: usize) -> [f64; 3] {
        let s = 1.0 / self.h;
        match beta {
            2 => [s, 0.0, 0.0],
            3 => [0.0, 0.0, s],
            4 => [0.0, 0.0, s],
            5 => [0.0, s, 0.0],
            _ => [0.0; 3],
        }
    }

    /// Field value of a coefficient vector.
    pub fn field(&self, coeffs: &[f64], p: Point) -> [f64; 2] {
        let m = self.monomials(p);
        [
            coeffs[0] * m[0] + coeffs[2] * m[1] + coeffs[4] * m[2],
            coeffs[1] * m[0] + coeffs[3] * m[1] + coeffs[5] * m[2],
        ]
    }

    pub fn strain_of(&self, coeffs: &[f64]) -> [f64; 3] {
        let mut e = [0.0; 3];
        for (beta, c) in coeffs.iter().enumerate() {
            let s = self.strain(beta);
            for k in 0..3 {
                e[k] += c * s[k];
            }
        }
        e
    }

    /// Coefficients of the affine field `u(x) = u0 + G (x - x_E)`.
    pub fn coefficients_of_affine(&self, at_center: [f64; 2], gradient: [[f64; 2]; 2]) -> [f64; 6] {
        let h = self.h;
        [
            at_center[0],
            at_center[1],
            h * gradient[0][0],
            h * gradient[1][0],
            h * gradient[0][1],
            h * gradient[1][1],
        ]
    }

    /// `D`: values of the basis at the vertices, `2N x 6`.
    pub fn vertex_values(&self, points: &[Point]) -> Mat<f64> {
        Mat::from_fn(2 * points.len(), POLY_DIM, |row, beta| {
            self.eval(beta, points[row / 2])[row % 2]
        })
    }
}

/// Integrals of `1, ξ, η, ξ², ξη, η²` over the polygon, summed over the fan
/// around a star center with the edge-midpoint rule (exact for quadratics).
fn monomial_moments(points: &[Point], basis: &PolyBasis, center: Point) -> [f64; 6] {
    let n = points.len();
    let mut out = [0.0; 6];
    for i in 0..n {
        let tri = [center, points[i], points[(i + 1) % n]];
        let area = polygon_area(&tri);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            let [_, x, y] = basis.monomials(mid);
            let vals = [1.0, x, y, x * x, x * y, y * y];
            for (o, v) in out.iter_mut().zip(vals) {
                *o += area / 3.0 * v;
            }
        }
    }
    out
}

fn voigt_dot(material: &Material, a: [f64; 3], b: [f64; 3]) -> f64 {
    let s = material.stress(a);
    s[0] * b[0] + s[1] * b[1] + s[2] * b[2]
}

/// Exact `a^E(p_α, p_β)` for the basis, `6 x 6`.
pub(crate) fn poly_stiffness(basis: &PolyBasis, area: f64, material: &Material) -> Mat<f64> {
    Mat::from_fn(POLY_DIM, POLY_DIM, |a, b| {
        area * voigt_dot(material, basis.strain(a), basis.strain(b))
    })
}

/// Exact ρ-weighted `L²` Gram matrix of the basis, `6 x 6`.
fn poly_mass(moments: &[f64; 6], density: f64) -> Mat<f64> {
    // ∫ m_a m_b indexed by monomial pair.
    let pair = |a: usize, b: usize| -> f64 {
        match (a.min(b), a.max(b)) {
            (0, 0) => moments[0],
            (0, 1) => moments[1],
            (0, 2) => moments[2],
            (1, 1) => moments[3],
            (1, 2) => moments[4],
            _ => moments[5],
        }
    };
    Mat::from_fn(POLY_DIM, POLY_DIM, |a, b| {
        if a % 2 == b % 2 {
            density * pair(a / 2, b / 2)
        } else {
            0.0
        }
    })
}

/// `a^E(p_α, φ_j)` for every basis member and vertex degree of freedom:
/// half of each adjacent edge's length-weighted traction.
fn boundary_traction_matrix(points: &[Point], basis: &PolyBasis, material: &Material) -> Mat<f64> {
    let n = points.len();
    let mut out = Mat::zeros(POLY_DIM, 2 * n);
    for alpha in 2..POLY_DIM {
        let s = material.stress(basis.strain(alpha));
        for i in 0..n {
            let (prev, here, next) = (points[(i + n - 1) % n], points[i], points[(i + 1) % n]);
            // |e| n_e = (dy, -dx) for counter-clockwise edges.
            let nx = 0.5 * ((here[1] - prev[1]) + (next[1] - here[1]));
            let ny = -0.5 * ((here[0] - prev[0]) + (next[0] - here[0]));
            out[(alpha, 2 * i)] = s[0] * nx + s[2] * ny;
            out[(alpha, 2 * i + 1)] = s[2] * nx + s[1] * ny;
        }
    }
    out
}

/// Test polynomials defining the projector, as coefficient rows: the three
/// rigid motions (translations and the rotation about the element center)
/// and three strain-generating fields.
const RIGID: [[f64; 6]; 3] = [
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, -1.0, 0.0],
];
const DEFORMING: [[f64; 6]; 3] = [
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 1.0, 1.0, 0.0],
];

/// Energy projector as a `6 x 2N` matrix from vertex values to basis
/// coefficients: `a^E(p, Πv) = a^E(p, v)` for the deforming fields and
/// vertex-average agreement `<<r, Πv>> = <<r, v>>` for the rigid motions.
pub fn energy_projector(points: &[Point], material: &Material) -> Result<(PolyBasis, Mat<f64>)> {
    let basis = basis_for(points)?;
    let area = polygon_area(points);
    Ok((basis, projector_with(points, &basis, area, material)?))
}

fn basis_for(points: &[Point]) -> Result<PolyBasis> {
    if points.len() < 3 {
        return Err(Error::DegenerateElement {
            element: usize::MAX,
            reason: format!("{} vertices", points.len()),
        });
    }
    Ok(PolyBasis {
        center: crate::mesh::polygon_centroid(points),
        h: polygon_diameter(points),
    })
}

fn projector_with(
    points: &[Point],
    basis: &PolyBasis,
    area: f64,
    material: &Material,
) -> Result<Mat<f64>> {
    let n = points.len();
    let d = basis.vertex_values(points);
    let a_hat = poly_stiffness(basis, area, material);
    let traction = boundary_traction_matrix(points, basis, material);
    // Energy rows are rescaled to O(1); scaling a row changes nothing else.
    let energy_scale = basis.h * basis.h / (area * (material.lambda + 2.0 * material.mu));

    let mut system = Mat::<f64>::zeros(POLY_DIM, POLY_DIM);
    let mut rhs = Mat::<f64>::zeros(POLY_DIM, 2 * n);
    for (row, t) in RIGID.iter().enumerate() {
        // <<t, p_β>> = (D t)ᵀ (D e_β) / N and <<t, φ_j>> = (D t)_j / N.
        let dt: Vec<f64> = (0..2 * n)
            .map(|r| (0..POLY_DIM).map(|b| d[(r, b)] * t[b]).sum())
            .collect();
        for beta in 0..POLY_DIM {
            system[(row, beta)] = (0..2 * n).map(|r| dt[r] * d[(r, beta)]).sum::<f64>() / n as f64;
        }
        for j in 0..2 * n {
            rhs[(row, j)] = dt[j] / n as f64;
        }
    }
    for (k, t) in DEFORMING.iter().enumerate() {
        let row = 3 + k;
        for beta in 0..POLY_DIM {
            system[(row, beta)] =
                energy_scale * (0..POLY_DIM).map(|a| t[a] * a_hat[(a, beta)]).sum::<f64>();
        }
        for j in 0..2 * n {
            rhs[(row, j)] =
                energy_scale * (0..POLY_DIM).map(|a| t[a] * traction[(a, j)]).sum::<f64>();
        }
    }
    let det = system.determinant();
    if !(det.abs() > 1e-12) {
        return Err(Error::DegenerateElement {
            element: usize::MAX,
            reason: format!("projector system is singular (det {det:e})"),
        });
    }
    Ok(system.partial_piv_lu().solve(&rhs))
}

/// For k = 1 the enhancement constraint forces `Π⁰ = Π^∇`.
pub fn l2_projector(energy_projector: &Mat<f64>) -> Mat<f64> {
    energy_projector.clone()
}

/// How the stabilization factors `σ_E`, `σ⁰_E` are derived from the
/// consistency matrices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizationScaling {
    /// Mean of all `2N` eigenvalues: `trace / 2N`.
    #[default]
    MeanEigenvalue,
    /// Mean of the nonzero eigenvalues: `trace / 3` for the stiffness
    /// (rank 3) and `trace / 6` for the mass (rank 6).
    NonzeroMean,
    /// Sum of the eigenvalues: `trace`.
    Trace,
}

impl std::str::FromStr for StabilizationScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-eigenvalue" => Ok(Self::MeanEigenvalue),
            "nonzero-mean" => Ok(Self::NonzeroMean),
            "trace" => Ok(Self::Trace),
            other => Err(Error::InvalidParameter(format!("unknown stabilization scaling {other:?}"))),
        }
    }
}

/// `(σ_E, σ⁰_E)` from the stiffness and mass consistency matrices.
pub fn stabilization_scaling(
    stiffness_consistency: &Mat<f64>,
    mass_consistency: &Mat<f64>,
    scaling: StabilizationScaling,
) -> (f64, f64) {
    let trace = |m: &Mat<f64>| (0..m.nrows()).map(|i| m[(i, i)]).sum::<f64>();
    let (k, m) = match scaling {
        StabilizationScaling::MeanEigenvalue => {
            let n = stiffness_consistency.nrows() as f64;
            (n, n)
        }
        StabilizationScaling::NonzeroMean => (3.0, POLY_DIM as f64),
        StabilizationScaling::Trace => (1.0, 1.0),
    };
    (trace(stiffness_consistency) / k, trace(mass_consistency) / m)
}

/// All local operators of one element.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    pub basis: PolyBasis,
    pub area: f64,
    /// `Π^∇` (also `Π⁰`), `6 x 2N`.
    pub projector: Mat<f64>,
    /// `D`, `2N x 6`.
    pub vertex_values: Mat<f64>,
    /// `I - D Π`, `2N x 2N`.
    pub remainder: Mat<f64>,
    pub poly_stiffness: Mat<f64>,
    pub poly_mass: Mat<f64>,
    pub stiffness_consistency: Mat<f64>,
    pub stiffness_stabilization: Mat<f64>,
    pub mass_consistency: Mat<f64>,
    pub mass_stabilization: Mat<f64>,
    pub sigma: f64,
    pub sigma0: f64,
}

impl LocalOperators {
    pub fn new(points: &[Point], material: &Material) -> Result<Self> {
        Self::with_scaling(points, material, StabilizationScaling::default())
    }

    pub fn with_scaling(
        points: &[Point],
        material: &Material,
        scaling: StabilizationScaling,
    ) -> Result<Self> {
        let basis = basis_for(points)?;
        let area = polygon_area(points);
        if !(area > 0.0) {
            return Err(Error::DegenerateElement {
                element: usize::MAX,
                reason: format!("area {area:e}"),
            });
        }
        let projector = projector_with(points, &basis, area, material)?;
        let center = star_center(points).ok_or(Error::StarCenter(usize::MAX))?;
        let moments = monomial_moments(points, &basis, center);
        let poly_stiffness = poly_stiffness(&basis, area, material);
        let poly_mass = poly_mass(&moments, material.density);
        let d = basis.vertex_values(points);
        let dim = 2 * points.len();
        let remainder = Mat::<f64>::identity(dim, dim) - &d * &projector;
        let stiffness_consistency = projector.transpose() * (&poly_stiffness * &projector);
        let l2 = l2_projector(&projector);
        let mass_consistency = l2.transpose() * (&poly_mass * &l2);
        let (sigma, sigma0) = stabilization_scaling(&stiffness_consistency, &mass_consistency, scaling);
        if !(sigma > 0.0 && sigma0 > 0.0) {
            return Err(Error::DegenerateElement {
                element: usize::MAX,
                reason: format!("stabilization scaling ({sigma:e}, {sigma0:e})"),
            });
        }
        let gram = remainder.transpose() * &remainder;
        let stiffness_stabilization = &gram * faer::Scale(sigma);
        let mass_stabilization = &gram * faer::Scale(sigma0);
        Ok(Self {
            basis,
            area,
            projector,
            vertex_values: d,
            remainder,
            poly_stiffness,
            poly_mass,
            stiffness_consistency,
            stiffness_stabilization,
            mass_consistency,
            mass_stabilization,
            sigma,
            sigma0,
        })
    }

    pub fn dofs(&self) -> usize {
        self.projector.ncols()
    }

    pub fn stiffness(&self) -> Mat<f64> {
        &self.stiffness_consistency + &self.stiffness_stabilization
    }

    pub fn mass(&self) -> Mat<f64> {
        &self.mass_consistency + &self.mass_stabilization
    }

    /// Basis coefficients of `Π v` for a local vertex vector.
    pub fn project(&self, local: &[f64]) -> [f64; POLY_DIM] {
        std::array::from_fn(|a| {
            (0..self.dofs()).map(|j| self.projector[(a, j)] * local[j]).sum()
        })
    }

    /// Vertex-sum `Σ_r |(v - Πv)(P_r)|²`.
    pub fn remainder_norm2(&self, local: &[f64]) -> f64 {
        let dim = self.dofs();
        (0..dim)
            .map(|i| {
                let r: f64 = (0..dim).map(|j| self.remainder[(i, j)] * local[j]).sum();
                r * r
            })
            .sum()
    }
}

pub fn local_stiffness(points: &[Point], material: &Material) -> Result<Mat<f64>> {
    Ok(LocalOperators::new(points, material)?.stiffness())
}

pub fn local_mass(points: &[Point], material: &Material) -> Result<Mat<f64>> {
    Ok(LocalOperators::new(points, material)?.mass())
}
