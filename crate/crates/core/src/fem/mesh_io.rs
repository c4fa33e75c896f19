//! Mesh files: `<stem>.json` holds topology and surfaces, `<stem>.bin` the
//! node coordinates as raw little-endian f64 pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Mesh;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct MeshManifest {
    dim: usize,
    num_nodes: usize,
    coordinates: String,
    sha256: String,
    elements: Vec<Vec<usize>>,
    element_body: Vec<usize>,
    surfaces: BTreeMap<String, Vec<[usize; 2]>>,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

pub fn save_mesh(mesh: &Mesh, stem: &Path) -> Result<()> {
    let (json, bin) = paths(stem);
    let bytes: Vec<u8> = mesh.nodes.iter().flatten().flat_map(|v| v.to_le_bytes()).collect();
    let manifest = MeshManifest {
        dim: mesh.dim,
        num_nodes: mesh.num_nodes(),
        coordinates: bin.file_name().unwrap().to_string_lossy().into_owned(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        elements: mesh.elements.clone(),
        element_body: mesh.element_body.clone(),
        surfaces: mesh.surfaces.clone(),
    };
    fs::write(&bin, bytes)?;
    fs::write(&json, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

pub fn load_mesh(stem: &Path) -> Result<Mesh> {
    let (json, _) = paths(stem);
    let manifest: MeshManifest = serde_json::from_slice(&fs::read(&json)?)?;
    let bin = json.with_file_name(&manifest.coordinates);
    let bytes = fs::read(&bin)?;
    if hex::encode(Sha256::digest(&bytes)) != manifest.sha256 {
        return Err(Error::Checksum(bin));
    }
    if bytes.len() != manifest.num_nodes * 16 {
        return Err(Error::Format { path: bin, message: "coordinate block has the wrong size".into() });
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let mesh = Mesh {
        dim: manifest.dim,
        nodes: values.chunks_exact(2).map(|p| [p[0], p[1]]).collect(),
        elements: manifest.elements,
        element_body: manifest.element_body,
        surfaces: manifest.surfaces,
    };
    mesh.validate()?;
    Ok(mesh)
}
