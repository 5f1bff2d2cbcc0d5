use std::path::{Path, PathBuf};

use super::{LocalOperators, Material, StabilizationScaling};
use crate::mesh::PolyMesh;
use crate::sparse::CscMatrix;
use crate::{Error, Result};

/// Global numbering of free degrees of freedom. Vertices on the closure of
/// the Dirichlet boundary carry none.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    /// `vertex_dof[v] = Some(k)` means the components of `v` are `2k, 2k+1`.
    vertex_dof: Vec<Option<usize>>,
    num_free_vertices: usize,
}

impl DofMap {
    pub fn new(mesh: &PolyMesh) -> Self {
        let mut next = 0;
        let vertex_dof = mesh
            .dirichlet_vertices()
            .into_iter()
            .map(|fixed| {
                (!fixed).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Self {
            vertex_dof,
            num_free_vertices: next,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.num_free_vertices
    }

    pub fn is_empty(&self) -> bool {
        self.num_free_vertices == 0
    }

    pub fn vertex(&self, v: usize) -> Option<usize> {
        self.vertex_dof[v]
    }

    /// Global index of local entry `2i + c` of an element, or `None` if fixed.
    pub fn element_dofs(&self, element: &[usize]) -> Vec<Option<usize>> {
        element
            .iter()
            .flat_map(|&v| {
                let k = self.vertex_dof[v];
                [k.map(|k| 2 * k), k.map(|k| 2 * k + 1)]
            })
            .collect()
    }

    /// Local vertex vector of an element with zeros on fixed vertices.
    pub fn gather(&self, element: &[usize], global: &[f64]) -> Vec<f64> {
        self.element_dofs(element)
            .into_iter()
            .map(|g| g.map_or(0.0, |g| global[g]))
            .collect()
    }

    /// Per-vertex displacement with zeros on fixed vertices.
    pub fn expand(&self, global: &[f64]) -> Vec<[f64; 2]> {
        self.vertex_dof
            .iter()
            .map(|k| k.map_or([0.0; 2], |k| [global[2 * k], global[2 * k + 1]]))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: CscMatrix,
    pub mass: CscMatrix,
    pub dof_map: DofMap,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        self.dof_map.len()
    }

    /// Writes `stiffness.mtx` and `mass.mtx` in coordinate form.
    pub fn dump(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, m) in [("stiffness.mtx", &self.stiffness), ("mass.mtx", &self.mass)] {
            let file = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
            m.write_coordinate(file)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssemblyOptions {
    pub scaling: StabilizationScaling,
    /// Write `stiffness.mtx` and `mass.mtx` here after assembly.
    pub dump_dir: Option<PathBuf>,
}

pub fn element_operators(
    mesh: &PolyMesh,
    material: &Material,
    scaling: StabilizationScaling,
) -> Result<Vec<LocalOperators>> {
    let build = |e: usize| {
        LocalOperators::with_scaling(&mesh.element_points(e), material, scaling).map_err(|err| match err {
            Error::DegenerateElement { reason, .. } => Error::DegenerateElement { element: e, reason },
            Error::StarCenter(_) => Error::StarCenter(e),
            other => other,
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..mesh.num_elements()).into_par_iter().map(build).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..mesh.num_elements()).map(build).collect()
    }
}

pub fn assemble(mesh: &PolyMesh, material: &Material) -> Result<GlobalSystem> {
    assemble_with(mesh, material, &AssemblyOptions::default())
}

pub fn assemble_with(
    mesh: &PolyMesh,
    material: &Material,
    options: &AssemblyOptions,
) -> Result<GlobalSystem> {
    if !mesh.edges().iter().any(|e| e.tag == crate::mesh::BoundaryTag::Dirichlet) {
        return Err(Error::SingularStiffness(
            "no Dirichlet edges: rigid motions are in the kernel".into(),
        ));
    }
    let dof_map = DofMap::new(mesh);
    let n = dof_map.len();
    let locals = element_operators(mesh, material, options.scaling)?;

    let mut columns = vec![Vec::new(); n];
    for element in mesh.elements() {
        let dofs: Vec<usize> = dof_map.element_dofs(element).into_iter().flatten().collect();
        for &j in &dofs {
            columns[j].extend_from_slice(&dofs);
        }
    }
    let mut stiffness = CscMatrix::with_pattern(n, columns);
    let mut mass = stiffness.clone();
    for (element, ops) in mesh.elements().iter().zip(&locals) {
        let dofs = dof_map.element_dofs(element);
        let (k, m) = (ops.stiffness(), ops.mass());
        for (b, gj) in dofs.iter().enumerate() {
            let Some(gj) = *gj else { continue };
            for (a, gi) in dofs.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                stiffness.add(gi, gj, k[(a, b)]);
                mass.add(gi, gj, m[(a, b)]);
            }
        }
    }
    let system = GlobalSystem {
        stiffness,
        mass,
        dof_map,
    };
    if let Some(dir) = &options.dump_dir {
        system.dump(dir)?;
    }
    Ok(system)
}
