//! Independent checks shared by the acceptance harness and the integration
//! tests: element samplers, closed-form polynomial integrals and the
//! triangle-mesh oracle comparison.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vem_spectra::adapt::{refine_fem, refine_vem};
use vem_spectra::eig::{solve_smallest, EigOptions};
use vem_spectra::estimator::{estimate_field, theta_term};
use vem_spectra::mesh::{
    generate_hexagonal_mesh, generate_trapezoidal_mesh, generate_triangle_mesh, generate_vessel_mesh,
    polygon_area, polygon_centroid, BoundaryTag, Point, PolyMesh,
};
use vem_spectra::sparse::CscMatrix;
use vem_spectra::vem::{assemble, LocalOperators, Material, StabilizationScaling};
use vem_spectra::fem_oracle;

pub const PROPERTY_TOL: f64 = 1e-10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `u(x) = c + G x`.
#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub c: [f64; 2],
    pub g: [[f64; 2]; 2],
}

impl Affine {
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut r = || rng.random_range(-1.0..1.0);
        Self { c: [r(), r()], g: [[r(), r()], [r(), r()]] }
    }

    pub fn rigid(tx: f64, ty: f64, rot: f64) -> Self {
        Self { c: [tx, ty], g: [[0.0, -rot], [rot, 0.0]] }
    }

    pub fn at(&self, p: Point) -> [f64; 2] {
        [
            self.c[0] + self.g[0][0] * p[0] + self.g[0][1] * p[1],
            self.c[1] + self.g[1][0] * p[0] + self.g[1][1] * p[1],
        ]
    }

    pub fn values(&self, points: &[Point]) -> Vec<f64> {
        points.iter().flat_map(|&p| self.at(p)).collect()
    }

    /// Voigt stress `[σxx, σyy, σxy]`.
    pub fn stress(&self, m: &Material) -> [f64; 3] {
        let (exx, eyy) = (self.g[0][0], self.g[1][1]);
        let exy = 0.5 * (self.g[0][1] + self.g[1][0]);
        [
            m.lambda * (exx + eyy) + 2.0 * m.mu * exx,
            m.lambda * (exx + eyy) + 2.0 * m.mu * eyy,
            2.0 * m.mu * exy,
        ]
    }
}

/// `∫_E f` for a quadratic `f`: signed fan from the centroid, edge-midpoint
/// rule on every triangle.
pub fn integrate_quadratic(points: &[Point], f: impl Fn(Point) -> f64) -> f64 {
    let c = polygon_centroid(points);
    let mid = |a: Point, b: Point| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    (0..points.len())
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % points.len()]);
            let area = 0.5 * ((a[0] - c[0]) * (b[1] - c[1]) - (b[0] - c[0]) * (a[1] - c[1]));
            area / 3.0 * (f(mid(c, a)) + f(mid(a, b)) + f(mid(b, c)))
        })
        .sum()
}

/// `a^E(p, v) = ∫_∂E (C ε(p) n) · v` for affine `p` (divergence-free stress)
/// and `v` linear on every edge.
pub fn boundary_energy(points: &[Point], p: &Affine, v: &[f64], m: &Material) -> f64 {
    let s = p.stress(m);
    let n = points.len();
    (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let (a, b) = (points[i], points[j]);
            // Outward normal times length for a counter-clockwise cycle.
            let nl = [b[1] - a[1], a[0] - b[0]];
            let t = [s[0] * nl[0] + s[2] * nl[1], s[2] * nl[0] + s[1] * nl[1]];
            0.5 * (t[0] * (v[2 * i] + v[2 * j]) + t[1] * (v[2 * i + 1] + v[2 * j + 1]))
        })
        .sum()
}

fn affine_map(points: &[Point], rng: &mut impl Rng) -> Vec<Point> {
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let scale = 10f64.powf(rng.random_range(-2.0..0.5));
    let shear = rng.random_range(-0.3..0.3);
    let shift = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
    let (s, c) = angle.sin_cos();
    points
        .iter()
        .map(|p| {
            let (x, y) = (p[0] + shear * p[1], p[1]);
            [shift[0] + scale * (c * x - s * y), shift[1] + scale * (s * x + c * y)]
        })
        .collect()
}

fn random_trapezoid(rng: &mut impl Rng) -> Vec<Point> {
    let y0 = rng.random_range(0.5..1.5);
    let y1 = rng.random_range(0.5..1.5);
    let w = rng.random_range(0.5..1.5);
    let corners = [[0.0, 0.0], [w, 0.0], [w, y1], [0.0, y0]];
    let mut out = Vec::new();
    for i in 0..4 {
        let (a, b): (Point, Point) = (corners[i], corners[(i + 1) % 4]);
        out.push(a);
        out.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    out
}

fn random_star(rng: &mut impl Rng) -> Vec<Point> {
    let n = rng.random_range(4..=10);
    let mut angles: Vec<f64> = (0..n)
        .map(|k| (k as f64 + rng.random_range(0.1..0.9)) * std::f64::consts::TAU / n as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
        .iter()
        .map(|&t| {
            let r = rng.random_range(0.5..1.0);
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn random_triangle(rng: &mut impl Rng) -> Vec<Point> {
    loop {
        let mut p = || [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
        let mut t = vec![p(), p(), p()];
        let area = polygon_area(&t);
        if area.abs() > 0.05 {
            if area < 0.0 {
                t.swap(1, 2);
            }
            return t;
        }
    }
}

/// Elements of `mesh` after splitting a random third of them: marked
/// elements become quadrilaterals, their neighbours gain hanging vertices.
fn refined_polygons(mesh: &PolyMesh, rng: &mut impl Rng) -> Vec<Vec<Point>> {
    let marked: Vec<usize> = (0..mesh.num_elements()).filter(|_| rng.random_bool(0.3)).collect();
    let refined = refine_vem(mesh, &marked).expect("refinement");
    (0..refined.num_elements()).map(|e| refined.element_points(e)).collect()
}

/// A labelled pool of at least `count` elements: trapezoids, hexagonal-mesh
/// cells, refined polygons with hanging vertices, star-shaped polygons and
/// triangles, each under a random similarity-plus-shear map.
pub fn sample_elements(count: usize, seed: u64) -> Vec<(&'static str, Vec<Point>)> {
    let mut rng = rng(seed);
    let hex = generate_hexagonal_mesh(6).unwrap();
    let trap = generate_trapezoidal_mesh(3).unwrap();
    let mut pool = Vec::new();
    while pool.len() < count {
        pool.push(("trapezoid", affine_map(&random_trapezoid(&mut rng), &mut rng)));
        let e = rng.random_range(0..hex.num_elements());
        pool.push(("hexagonal", affine_map(&hex.element_points(e), &mut rng)));
        let source = if rng.random_bool(0.5) { &hex } else { &trap };
        let refined = refined_polygons(source, &mut rng);
        let pick = refined[rng.random_range(0..refined.len())].clone();
        pool.push(("refined", affine_map(&pick, &mut rng)));
        pool.push(("star", affine_map(&random_star(&mut rng), &mut rng)));
        pool.push(("triangle", affine_map(&random_triangle(&mut rng), &mut rng)));
    }
    pool
}

pub fn random_material(rng: &mut impl Rng) -> Material {
    let young = 10f64.powf(rng.random_range(-1.0..11.0));
    let poisson = rng.random_range(0.0..0.49);
    let density = 10f64.powf(rng.random_range(-1.0..4.0));
    Material::new(density, young, poisson).unwrap()
}

/// Worst relative defect of each element property.
#[derive(Debug, Default, Clone, Copy)]
pub struct PropertyDefects {
    pub reproduction: f64,
    pub nullspace: f64,
    pub rank: f64,
    pub energy_consistency: f64,
    pub mass_consistency: f64,
    pub partition_of_unity: f64,
    pub theta_triangle: f64,
    pub theta_linear: f64,
}

impl PropertyDefects {
    pub fn merge(&mut self, other: &Self) {
        let pairs = [
            (&mut self.reproduction, other.reproduction),
            (&mut self.nullspace, other.nullspace),
            (&mut self.rank, other.rank),
            (&mut self.energy_consistency, other.energy_consistency),
            (&mut self.mass_consistency, other.mass_consistency),
            (&mut self.partition_of_unity, other.partition_of_unity),
            (&mut self.theta_triangle, other.theta_triangle),
            (&mut self.theta_linear, other.theta_linear),
        ];
        for (a, b) in pairs {
            *a = a.max(b);
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 8] {
        [
            ("polynomial reproduction", self.reproduction),
            ("rigid nullspace", self.nullspace),
            ("rank 2N-3", self.rank),
            ("energy consistency", self.energy_consistency),
            ("mass consistency", self.mass_consistency),
            ("partition of unity", self.partition_of_unity),
            ("theta on triangles", self.theta_triangle),
            ("theta on linear fields", self.theta_linear),
        ]
    }

    pub fn worst(&self) -> f64 {
        self.named().iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn mat_vec(m: &faer::Mat<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

pub fn check_element(points: &[Point], material: &Material, rng: &mut impl Rng) -> PropertyDefects {
    let ops = LocalOperators::with_scaling(points, material, StabilizationScaling::default()).expect("local operators");
    let (k, m) = (ops.stiffness(), ops.mass());
    let dim = 2 * points.len();
    let k_max = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| k[(i, j)].abs()).fold(0.0, f64::max);
    let mut d = PropertyDefects::default();

    // Π p = p, both at the vertices and away from them.
    let p = Affine::random(rng);
    let pv = p.values(points);
    let coeffs = ops.project(&pv);
    let c = polygon_centroid(points);
    let probe = [0.3 * points[0][0] + 0.7 * c[0], 0.3 * points[0][1] + 0.7 * c[1]];
    let scale = pv.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(p.at(probe)[0].abs());
    let field = ops.basis.field(&coeffs, probe);
    let exact = p.at(probe);
    d.reproduction = ((field[0] - exact[0]).hypot(field[1] - exact[1]) / scale)
        .max(ops.remainder_norm2(&pv).sqrt() / norm(&pv));

    // Rigid motions span the kernel of K_E.
    let h = ops.basis.h;
    for r in [Affine::rigid(1.0, 0.0, 0.0), Affine::rigid(0.0, 1.0, 0.0), Affine::rigid(0.0, 0.0, 1.0 / h)] {
        let rv = r.values(points);
        let kr = mat_vec(&k, &rv);
        d.nullspace = d.nullspace.max(norm(&kr) / (k_max * norm(&rv) * dim as f64));
    }
    let eig = k.self_adjoint_eigenvalues(faer::Side::Lower).expect("eigenvalues");
    let top = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zero = eig.iter().filter(|v| v.abs() <= 1e-10 * top).count();
    let smallest_positive = eig[3];
    d.rank = if zero == 3 && smallest_positive > 0.0 { 0.0 } else { 1.0 };

    // a_h(p, v) = a(p, v) for arbitrary vertex data v.
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let discrete = dot(&pv, &mat_vec(&k, &v));
    let exact = boundary_energy(points, &p, &v, material);
    d.energy_consistency = (discrete - exact).abs() / (k_max * norm(&pv) * norm(&v) * dim as f64);

    // b_h(p, q) = ∫ ρ p·q for polynomial arguments.
    let q = Affine::random(rng);
    let qv = q.values(points);
    let discrete = dot(&pv, &mat_vec(&m, &qv));
    let exact = material.density
        * integrate_quadratic(points, |x| {
            let (a, b) = (p.at(x), q.at(x));
            a[0] * b[0] + a[1] * b[1]
        });
    let size = material.density * ops.area * norm(&pv) * norm(&qv) / dim as f64;
    d.mass_consistency = (discrete - exact).abs() / size;

    // Σ_ij M_E[x_i, x_j] = ρ |E|, same for y, no x-y coupling.
    let ex: Vec<f64> = (0..dim).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let ey: Vec<f64> = (0..dim).map(|i| if i % 2 == 1 { 1.0 } else { 0.0 }).collect();
    let target = material.density * ops.area;
    d.partition_of_unity = ((dot(&ex, &mat_vec(&m, &ex)) - target).abs() / target)
        .max((dot(&ey, &mat_vec(&m, &ey)) - target).abs() / target)
        .max(dot(&ex, &mat_vec(&m, &ey)).abs() / target);

    let theta_scale = ops.sigma + ops.sigma0;
    if points.len() == 3 {
        d.theta_triangle = theta_term(&ops, &v) / (theta_scale * dot(&v, &v));
    }
    d.theta_linear = theta_term(&ops, &pv) / (theta_scale * dot(&pv, &pv));
    d
}

/// Replaces `mesh`'s interior vertices by random perturbations of up to
/// `amount` times the local spacing.
pub fn jitter(mesh: &PolyMesh, amount: f64, seed: u64) -> PolyMesh {
    let mut rng = rng(seed);
    let mut on_boundary = vec![false; mesh.num_vertices()];
    for edge in mesh.edges().iter().filter(|e| e.is_boundary()) {
        for v in edge.vertices {
            on_boundary[v] = true;
        }
    }
    let spacing = mesh
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]);
            (a[0] - b[0]).hypot(a[1] - b[1])
        })
        .fold(f64::INFINITY, f64::min);
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&on_boundary)
        .map(|(&p, &fixed)| {
            if fixed {
                p
            } else {
                let r = amount * spacing;
                [p[0] + rng.random_range(-r..r), p[1] + rng.random_range(-r..r)]
            }
        })
        .collect();
    PolyMesh::new(vertices, mesh.elements().to_vec(), |a, b| {
        mesh.edges()[mesh.edge_between(a, b).expect("boundary edge")].tag
    })
    .expect("jittered mesh")
}

/// Five all-triangle meshes with the material they are tested with.
pub fn triangle_meshes() -> Vec<(String, PolyMesh, Material)> {
    let vessel = generate_vessel_mesh().unwrap();
    let corner_cells: Vec<usize> = (0..vessel.num_elements()).step_by(5).collect();
    let bisected = refine_fem(&vessel, &corner_cells).unwrap();
    let bisected = refine_fem(&bisected, &[0, 1, 2, 3]).unwrap();
    vec![
        ("unit square, 4x4".into(), generate_triangle_mesh(4).unwrap(), Material::steel()),
        ("unit square, 12x12".into(), generate_triangle_mesh(12).unwrap(), Material::steel()),
        ("jittered square, 8x8".into(), jitter(&generate_triangle_mesh(8).unwrap(), 0.3, 7), Material::new(2.0, 3.0, 0.2).unwrap()),
        ("vessel".into(), vessel, Material::unit()),
        ("vessel, bisected twice".into(), bisected, Material::unit()),
    ]
}

fn matrix_defect(a: &CscMatrix, b: &CscMatrix) -> f64 {
    let scale = a.max_abs().max(b.max_abs());
    let mut worst: f64 = 0.0;
    for (i, j, v) in a.iter() {
        worst = worst.max((v - b.get(i, j)).abs());
    }
    for (i, j, v) in b.iter() {
        worst = worst.max((v - a.get(i, j)).abs());
    }
    worst / scale
}

/// `(stiffness defect, mass defect, eigenvalue defect)` between the virtual
/// element and P1 assemblies, all relative.
pub fn oracle_defects(mesh: &PolyMesh, material: &Material, modes: usize) -> (f64, f64, f64) {
    let vem = assemble(mesh, material).unwrap();
    let (a, b) = fem_oracle::assemble(mesh, material).unwrap();
    let options = EigOptions::default();
    let lv = solve_smallest(&vem.stiffness, &vem.mass, modes, &options).unwrap().eigenvalues;
    let lf = solve_smallest(&a, &b, modes, &options).unwrap().eigenvalues;
    let eig = lv.iter().zip(&lf).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max);
    (matrix_defect(&vem.stiffness, &a), matrix_defect(&vem.mass, &b), eig)
}

/// `(η, scale)` for a rigid motion with `λ_h = 0`, where `scale` is the
/// indicator size a unit-gradient field would produce.
pub fn rigid_indicator(mesh: &PolyMesh, material: &Material, motion: Affine) -> (f64, f64) {
    let u: Vec<[f64; 2]> = mesh.vertices().iter().map(|&p| motion.at(p)).collect();
    let report = estimate_field(mesh, material, StabilizationScaling::default(), &u, 0.0, None).unwrap();
    let gradient = motion.g[1][0].abs().max(1.0);
    let scale = (material.lambda + 2.0 * material.mu) * gradient * mesh.total_area().sqrt();
    (report.eta(), scale)
}

pub fn boundary_tags_present(mesh: &PolyMesh) -> bool {
    mesh.edges().iter().any(|e| e.tag == BoundaryTag::Dirichlet)
}
