//! Newest-vertex bisection.
//!
//! A triangle cycle `[v0, v1, v2]` stores its newest vertex first, so its
//! refinement edge is `(v1, v2)`. Bisection inserts the midpoint `m` of that
//! edge and produces `[m, v0, v1]` and `[m, v2, v0]`, each again with the
//! newest vertex first. Conformity is restored by marking edges: whenever a
//! triangle has a marked edge, its refinement edge gets marked too, and the
//! recursive bisection then splits exactly the marked edges.

use std::collections::HashSet;

use super::Splitter;
use crate::mesh::PolyMesh;
use crate::{Error, Result};

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

pub fn refine_fem(mesh: &PolyMesh, marked: &[usize]) -> Result<PolyMesh> {
    if let Some(e) = mesh.elements().iter().position(|c| c.len() != 3) {
        return Err(Error::Refinement {
            element: e,
            reason: format!("bisection needs triangles, found {} vertices", mesh.element(e).len()),
        });
    }
    let mut split: HashSet<(usize, usize)> = HashSet::new();
    for &e in marked {
        let c = mesh
            .elements()
            .get(e)
            .ok_or_else(|| Error::InvalidParameter(format!("marked element {e} does not exist")))?;
        split.insert(key(c[1], c[2]));
    }
    // Closure: any triangle with a split edge must split its refinement edge.
    loop {
        let mut changed = false;
        for c in mesh.elements() {
            let refinement = key(c[1], c[2]);
            if split.contains(&refinement) {
                continue;
            }
            if split.contains(&key(c[0], c[1])) || split.contains(&key(c[2], c[0])) {
                split.insert(refinement);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut splitter = Splitter::new(mesh);
    let mut elements = Vec::with_capacity(mesh.num_elements() + 2 * split.len());
    for c in mesh.elements() {
        bisect([c[0], c[1], c[2]], &split, &mut splitter, &mut elements);
    }
    splitter.build(elements)
}

fn bisect(
    t: [usize; 3],
    split: &HashSet<(usize, usize)>,
    splitter: &mut Splitter,
    out: &mut Vec<Vec<usize>>,
) {
    let [v0, v1, v2] = t;
    if !split.contains(&key(v1, v2)) {
        out.push(t.to_vec());
        return;
    }
    let m = splitter.midpoint(v1, v2);
    bisect([m, v0, v1], split, splitter, out);
    bisect([m, v2, v0], split, splitter, out);
}
