//! Model directory: `manifest.json` plus one raw little-endian f64 block per
//! matrix (column-major), each with a SHA-256 checksum in the manifest.
//!
//! | file        | contents                                                |
//! |-------------|---------------------------------------------------------|
//! | `U.bin`     | displacement snapshots (free dofs x snapshots)          |
//! | `Lam.bin`   | multiplier snapshots, the dual dictionary               |
//! | `phi.bin`   | primal basis                                            |
//! | `sigma.bin` | full singular spectrum of `U`                           |
//! | `Kr.bin`    | reduced stiffness terms side by side (rank x rank*terms)|
//! | `fr.bin`    | `Phi^T f_f`, then each term's lifting block             |

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{column_norms, ReducedModel, ReducedTerm, TrainingDesign};
use crate::densela::{DenseMatrix, TruncatedBasis, Vector};
use crate::fem::Coefficient;
use crate::{Error, Result, TOOL_VERSION};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub file: String,
    pub rows: usize,
    pub cols: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub tool_version: String,
    pub problem_id: String,
    pub design: TrainingDesign,
    pub delta: f64,
    pub tau: f64,
    pub rank: usize,
    pub coefficients: Vec<Coefficient>,
    pub dual_column_norms: Vec<f64>,
    pub primal_column_norms: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub blocks: BTreeMap<String, BlockInfo>,
}

fn encode(m: &DenseMatrix) -> Vec<u8> {
    m.as_slice().iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn hconcat(blocks: &[&DenseMatrix], rows: usize) -> DenseMatrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DenseMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

fn blocks_of(model: &ReducedModel) -> Vec<(&'static str, DenseMatrix)> {
    let r = model.rank();
    let sigma = DenseMatrix::from_column_slice(model.phi.spectrum.len(), 1, &model.phi.spectrum);
    let kr: Vec<&DenseMatrix> = model.terms.iter().map(|t| &t.stiffness).collect();
    let load = DenseMatrix::from_column_slice(r, 1, model.load.as_slice());
    let mut fr: Vec<&DenseMatrix> = vec![&load];
    fr.extend(model.terms.iter().map(|t| &t.lifting));
    vec![
        ("U", model.primal_dict.clone()),
        ("Lam", model.dual_dict.clone()),
        ("phi", model.phi.vectors.clone()),
        ("sigma", sigma),
        ("Kr", hconcat(&kr, r)),
        ("fr", hconcat(&fr, r)),
    ]
}

fn manifest_of(model: &ReducedModel, blocks: BTreeMap<String, BlockInfo>) -> ModelManifest {
    ModelManifest {
        tool_version: TOOL_VERSION.to_string(),
        problem_id: model.problem_id.clone(),
        design: model.design.clone(),
        delta: model.delta,
        tau: model.tau,
        rank: model.rank(),
        coefficients: model.terms.iter().map(|t| t.coefficient).collect(),
        dual_column_norms: column_norms(&model.dual_dict),
        primal_column_norms: column_norms(&model.primal_dict),
        snapshot_times: model.snapshot_times.clone(),
        blocks,
    }
}

fn block_infos(model: &ReducedModel) -> Vec<(BlockInfo, Vec<u8>)> {
    blocks_of(model)
        .into_iter()
        .map(|(name, m)| {
            let bytes = encode(&m);
            let info = BlockInfo {
                file: format!("{name}.bin"),
                rows: m.nrows(),
                cols: m.ncols(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            };
            (info, bytes)
        })
        .collect()
}

/// Serialised manifest of a model, as written by [`save_model`].
pub fn manifest_json(model: &ReducedModel) -> Result<Vec<u8>> {
    let blocks = block_infos(model).into_iter().map(|(i, _)| (i.file.trim_end_matches(".bin").to_string(), i)).collect();
    Ok(serde_json::to_vec_pretty(&manifest_of(model, blocks))?)
}

/// SHA-256 of the model manifest (which itself carries the block checksums),
/// with the snapshot wall-clock times left out so that rebuilding the same
/// model gives the same hash.
pub fn manifest_hash(model: &ReducedModel) -> Result<String> {
    let blocks = block_infos(model).into_iter().map(|(i, _)| (i.file.trim_end_matches(".bin").to_string(), i)).collect();
    let mut manifest = manifest_of(model, blocks);
    manifest.snapshot_times.clear();
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(&manifest)?)))
}

pub fn save_model(model: &ReducedModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (info, bytes) in block_infos(model) {
        fs::write(dir.join(&info.file), bytes)?;
    }
    fs::write(dir.join(MANIFEST), manifest_json(model)?)?;
    Ok(())
}

fn read_block(dir: &Path, manifest: &ModelManifest, name: &str) -> Result<DenseMatrix> {
    let info = manifest.blocks.get(name).ok_or_else(|| Error::Format {
        path: dir.join(MANIFEST),
        message: format!("missing block {name}"),
    })?;
    let path = dir.join(&info.file);
    let bytes = fs::read(&path)?;
    if hex::encode(Sha256::digest(&bytes)) != info.sha256 {
        return Err(Error::Checksum(path));
    }
    if bytes.len() != info.rows * info.cols * 8 {
        return Err(Error::Format { path, message: "block size disagrees with manifest".into() });
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(DenseMatrix::from_vec(info.rows, info.cols, values))
}

pub fn read_manifest(dir: &Path) -> Result<ModelManifest> {
    let manifest: ModelManifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST))?)?;
    if manifest.tool_version != TOOL_VERSION {
        return Err(Error::VersionMismatch { found: manifest.tool_version, expected: TOOL_VERSION.to_string() });
    }
    Ok(manifest)
}

pub fn load_model(dir: &Path) -> Result<ReducedModel> {
    let manifest = read_manifest(dir)?;
    let bad = |message: &str| Error::Format { path: dir.join(MANIFEST), message: message.into() };
    let primal_dict = read_block(dir, &manifest, "U")?;
    let dual_dict = read_block(dir, &manifest, "Lam")?;
    let vectors = read_block(dir, &manifest, "phi")?;
    let sigma = read_block(dir, &manifest, "sigma")?;
    let kr = read_block(dir, &manifest, "Kr")?;
    let fr = read_block(dir, &manifest, "fr")?;
    let r = manifest.rank;
    let n_terms = manifest.coefficients.len();
    let lift_cols = manifest.design.bounds.len() + 1;
    if vectors.ncols() != r || kr.shape() != (r, r * n_terms) || fr.shape() != (r, 1 + lift_cols * n_terms) {
        return Err(bad("reduced operator shapes disagree with rank"));
    }
    if sigma.nrows() < r {
        return Err(bad("spectrum shorter than rank"));
    }
    let spectrum: Vec<f64> = sigma.as_slice().to_vec();
    let terms = manifest
        .coefficients
        .iter()
        .enumerate()
        .map(|(q, &coefficient)| ReducedTerm {
            coefficient,
            stiffness: kr.columns(q * r, r).into_owned(),
            lifting: fr.columns(1 + q * lift_cols, lift_cols).into_owned(),
        })
        .collect();
    Ok(ReducedModel {
        problem_id: manifest.problem_id,
        design: manifest.design,
        phi: TruncatedBasis { vectors, singular_values: spectrum[..r].to_vec(), spectrum, delta: manifest.delta },
        dual_dict,
        primal_dict,
        terms,
        load: Vector::from_column_slice(fr.column(0).as_slice()),
        delta: manifest.delta,
        tau: manifest.tau,
        snapshot_times: manifest.snapshot_times,
    })
}

/// [`load_model`], refusing a model built for a different problem.
pub fn load_model_for(dir: &Path, problem_id: &str) -> Result<ReducedModel> {
    let model = load_model(dir)?;
    if model.problem_id != problem_id {
        return Err(Error::ProblemMismatch { model: model.problem_id, query: problem_id.to_string() });
    }
    Ok(model)
}
