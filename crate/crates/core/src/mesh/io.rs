use serde::{Deserialize, Serialize};

use super::{MeshError, Triangulation};

/// On-disk mesh: 0-based simplices into the vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
}

impl From<&Triangulation> for MeshFile {
    fn from(t: &Triangulation) -> Self {
        MeshFile {
            n: t.dim(),
            vertices: t.vertices().map(<[f64]>::to_vec).collect(),
            simplices: t.simplices().map(<[usize]>::to_vec).collect(),
        }
    }
}

impl TryFrom<MeshFile> for Triangulation {
    type Error = MeshError;
    fn try_from(f: MeshFile) -> Result<Self, MeshError> {
        Triangulation::new(f.n, &f.vertices, &f.simplices)
    }
}

impl Triangulation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MeshFile::from(self)).expect("mesh serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MeshError> {
        let f: MeshFile =
            serde_json::from_str(text).map_err(|e| MeshError::Format(e.to_string()))?;
        f.try_into()
    }
}
