use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimplicialComplex3;
use crate::CoreError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 3]>,
    pub tets: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_faces: Option<Vec<[usize; 3]>>,
}

impl MeshFile {
    pub fn from_complex(c: &SimplicialComplex3) -> Self {
        let whole = c.gamma().len() == c.boundary_faces().len();
        MeshFile {
            vertices: c.vertices().to_vec(),
            tets: c.tets().to_vec(),
            gamma_faces: (!whole).then(|| c.gamma().iter().map(|&f| c.faces()[f]).collect()),
        }
    }

    pub fn into_complex(self) -> Result<SimplicialComplex3, CoreError> {
        let c = SimplicialComplex3::new(self.vertices, self.tets)?;
        match self.gamma_faces {
            None => Ok(c),
            Some(faces) => {
                let mut ids = Vec::with_capacity(faces.len());
                for f in faces {
                    let id = c
                        .face_id(f[0], f[1], f[2])
                        .filter(|&id| c.is_boundary(2, id))
                        .ok_or_else(|| CoreError::Malformed(format!("gamma face {f:?} is not a boundary face")))?;
                    ids.push(id);
                }
                c.with_gamma(ids)
            }
        }
    }
}

pub fn load_complex(path: &Path) -> Result<SimplicialComplex3, CoreError> {
    let text = std::fs::read_to_string(path)?;
    let file: MeshFile = serde_json::from_str(&text)?;
    file.into_complex()
}

pub fn save_complex(c: &SimplicialComplex3, path: &Path) -> Result<(), CoreError> {
    std::fs::write(path, serde_json::to_string_pretty(&MeshFile::from_complex(c))?)?;
    Ok(())
}
