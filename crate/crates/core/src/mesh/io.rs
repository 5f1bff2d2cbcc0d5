use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundaryTag, Point, PolyMesh};
use crate::{Error, Result};

/// On-disk mesh document: `vertices` as `[x, y]` pairs, `elements` as
/// counter-clockwise vertex-index lists and `edges` as `[v0, v1, tag]`
/// triples with tag one of `"interior"`, `"dirichlet"`, `"neumann"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize, BoundaryTag)>,
}

impl From<&PolyMesh> for MeshFile {
    fn from(mesh: &PolyMesh) -> Self {
        Self {
            vertices: mesh.vertices().to_vec(),
            elements: mesh.elements().to_vec(),
            edges: mesh
                .edges()
                .iter()
                .map(|e| (e.vertices[0], e.vertices[1], e.tag))
                .collect(),
        }
    }
}

impl TryFrom<MeshFile> for PolyMesh {
    type Error = Error;

    fn try_from(file: MeshFile) -> Result<Self> {
        let mut tags = HashMap::with_capacity(file.edges.len());
        for &(a, b, tag) in &file.edges {
            if tags.insert((a.min(b), a.max(b)), tag).is_some() {
                return Err(Error::InvalidMesh(format!("edge ({a}, {b}) listed twice")));
            }
        }
        let mut missing = None;
        let mesh = PolyMesh::new(file.vertices, file.elements, |a, b| {
            match tags.get(&(a.min(b), a.max(b))) {
                Some(&tag) => tag,
                None => {
                    missing.get_or_insert((a, b));
                    BoundaryTag::Neumann
                }
            }
        })?;
        if let Some((a, b)) = missing {
            return Err(Error::InvalidMesh(format!("boundary edge ({a}, {b}) not listed")));
        }
        if mesh.edges().len() != tags.len() {
            return Err(Error::InvalidMesh(format!(
                "{} edges listed but element cycles define {}",
                tags.len(),
                mesh.edges().len()
            )));
        }
        for e in mesh.edges() {
            let [a, b] = e.vertices;
            let listed = tags.get(&(a.min(b), a.max(b))).copied();
            if listed != Some(e.tag) {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) listed as {listed:?} but is {:?}",
                    e.tag
                )));
            }
        }
        Ok(mesh)
    }
}

impl PolyMesh {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MeshFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<MeshFile>(text)?.try_into()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
