//! Closed-form linear triangle elements.
//!
//! On triangles the k = 1 virtual element space is exactly `[P1]²`, so these
//! matrices must coincide with the virtual element ones. Nothing here calls
//! into [`crate::vem`]; only the material data is shared.

use crate::mesh::{Point, PolyMesh};
use crate::sparse::CscMatrix;
use crate::vem::Material;
use crate::{Error, Result};

pub type TriMatrix = [[f64; 6]; 6];

fn signed_area2(t: &[Point; 3]) -> f64 {
    (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])
}

fn check(t: &[Point; 3]) -> Result<f64> {
    let area2 = signed_area2(t);
    let scale = (0..3)
        .map(|i| {
            let (p, q) = (t[i], t[(i + 1) % 3]);
            (p[0] - q[0]).hypot(p[1] - q[1])
        })
        .fold(0.0, f64::max);
    if !(area2.abs() > 1e-14 * scale * scale) {
        return Err(Error::DegenerateElement {
            element: usize::MAX,
            reason: format!("triangle area {:e}", 0.5 * area2),
        });
    }
    Ok(area2)
}

/// `|T| Bᵀ C B` with `B` built from the barycentric gradients.
pub fn tri_stiffness(t: &[Point; 3], material: &Material) -> Result<TriMatrix> {
    let area2 = check(t)?;
    let mut b = [[0.0; 6]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let dx = (t[j][1] - t[k][1]) / area2;
        let dy = (t[k][0] - t[j][0]) / area2;
        b[0][2 * i] = dx;
        b[1][2 * i + 1] = dy;
        b[2][2 * i] = dy;
        b[2][2 * i + 1] = dx;
    }
    let (l, m) = (material.lambda, material.mu);
    let c = [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]];
    let area = 0.5 * area2.abs();
    let mut k = [[0.0; 6]; 6];
    for (r, row) in k.iter_mut().enumerate() {
        for (s, entry) in row.iter_mut().enumerate() {
            let mut sum = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    sum += b[p][r] * c[p][q] * b[q][s];
                }
            }
            *entry = area * sum;
        }
    }
    Ok(k)
}

/// Consistent mass, `ρ|T|/12 · (1 + δ_ij)` per component.
pub fn tri_mass(t: &[Point; 3], material: &Material) -> Result<TriMatrix> {
    let area = 0.5 * check(t)?.abs();
    let mut m = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            let v = material.density * area / 12.0 * if i == j { 2.0 } else { 1.0 };
            m[2 * i][2 * j] = v;
            m[2 * i + 1][2 * j + 1] = v;
        }
    }
    Ok(m)
}

/// Global `(A, B)` of a triangle mesh with Dirichlet-closure vertices
/// removed and free vertices numbered in index order.
pub fn assemble(mesh: &PolyMesh, material: &Material) -> Result<(CscMatrix, CscMatrix)> {
    if !mesh.is_all_triangles() {
        return Err(Error::InvalidMesh("linear triangle oracle needs a triangle mesh".into()));
    }
    let mut fixed = vec![false; mesh.num_vertices()];
    for edge in mesh.edges() {
        if edge.tag == crate::mesh::BoundaryTag::Dirichlet {
            fixed[edge.vertices[0]] = true;
            fixed[edge.vertices[1]] = true;
        }
    }
    let mut number = vec![None; mesh.num_vertices()];
    let mut next = 0;
    for (v, &f) in fixed.iter().enumerate() {
        if !f {
            number[v] = Some(next);
            next += 1;
        }
    }
    let n = 2 * next;
    let (mut tk, mut tm) = (Vec::new(), Vec::new());
    for (e, cycle) in mesh.elements().iter().enumerate() {
        let t = [
            mesh.vertices()[cycle[0]],
            mesh.vertices()[cycle[1]],
            mesh.vertices()[cycle[2]],
        ];
        let with_element = |err| match err {
            Error::DegenerateElement { reason, .. } => Error::DegenerateElement { element: e, reason },
            other => other,
        };
        let k = tri_stiffness(&t, material).map_err(with_element)?;
        let m = tri_mass(&t, material).map_err(with_element)?;
        for a in 0..6 {
            let Some(ga) = number[cycle[a / 2]].map(|v| 2 * v + a % 2) else { continue };
            for b in 0..6 {
                let Some(gb) = number[cycle[b / 2]].map(|v| 2 * v + b % 2) else { continue };
                tk.push((ga, gb, k[a][b]));
                tm.push((ga, gb, m[a][b]));
            }
        }
    }
    Ok((CscMatrix::from_triplets(n, n, &tk), CscMatrix::from_triplets(n, n, &tm)))
}
