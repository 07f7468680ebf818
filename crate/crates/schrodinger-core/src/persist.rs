//! Binary `f64` arrays with a JSON sidecar.
//!
//! `name.bin` holds little-endian doubles in row-major order; `name.json`
//! records the shape, a SHA-256 of the payload and free-form metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArraySidecar {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub sha256: String,
    pub meta: serde_json::Value,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CoreError + '_ {
    move |source| CoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

pub fn encode(data: &[f64]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write `data` (row-major, `shape`) to `stem.bin` plus `stem.json`.
pub fn write_array(stem: &Path, data: &[f64], shape: &[usize], meta: serde_json::Value) -> Result<ArraySidecar> {
    let expected: usize = shape.iter().product();
    if expected != data.len() {
        return Err(CoreError::Metadata(format!(
            "shape {:?} does not match {} values",
            shape,
            data.len()
        )));
    }
    let (bin, json) = paths(stem);
    if let Some(dir) = bin.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let bytes = encode(data);
    let sidecar = ArraySidecar {
        shape: shape.to_vec(),
        dtype: "f64-le".into(),
        sha256: sha256_hex(&bytes),
        meta,
    };
    fs::write(&bin, &bytes).map_err(io_err(&bin))?;
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| CoreError::Metadata(e.to_string()))?;
    fs::write(&json, text).map_err(io_err(&json))?;
    Ok(sidecar)
}

/// Read an array written by [`write_array`], verifying the checksum.
pub fn read_array(stem: &Path) -> Result<(Vec<f64>, ArraySidecar)> {
    let (bin, json) = paths(stem);
    let text = fs::read_to_string(&json).map_err(io_err(&json))?;
    let sidecar: ArraySidecar = serde_json::from_str(&text).map_err(|e| CoreError::Metadata(e.to_string()))?;
    let bytes = fs::read(&bin).map_err(io_err(&bin))?;
    if sha256_hex(&bytes) != sidecar.sha256 {
        return Err(CoreError::Checksum(bin.display().to_string()));
    }
    if bytes.len() % 8 != 0 || bytes.len() / 8 != sidecar.shape.iter().product::<usize>() {
        return Err(CoreError::Metadata("payload length does not match shape".into()));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((data, sidecar))
}

/// Persist spectral data as `stem.bin/json` (eigenvectors, sites x modes)
/// with eigenvalues and grid in the sidecar metadata.
pub fn save_spectral(stem: &Path, data: &crate::SpectralData) -> Result<ArraySidecar> {
    let dim = data.dim();
    let k = data.count();
    let v = data.vectors();
    let mut flat = Vec::with_capacity(dim * k);
    for i in 0..dim {
        for c in 0..k {
            flat.push(v[(i, c)]);
        }
    }
    let meta = serde_json::json!({
        "kind": "spectral",
        "eigenvalues": data.eigenvalues(),
        "grid": data.grid(),
        "weight": data.weight(),
        "spacing": data.weight().sqrt(),
        "summary": data.meta(),
    });
    write_array(stem, &flat, &[dim, k], meta)
}

pub fn load_spectral(stem: &Path) -> Result<crate::SpectralData> {
    let (flat, side) = read_array(stem)?;
    let bad = |what: &str| CoreError::Metadata(format!("spectral sidecar: {what}"));
    if side.shape.len() != 2 {
        return Err(bad("shape must be 2-d"));
    }
    let (dim, k) = (side.shape[0], side.shape[1]);
    let eig: Vec<f64> = serde_json::from_value(side.meta["eigenvalues"].clone()).map_err(|_| bad("eigenvalues"))?;
    let grid: Option<crate::LatticeGrid> = serde_json::from_value(side.meta["grid"].clone()).map_err(|_| bad("grid"))?;
    let weight = side.meta["weight"].as_f64().ok_or_else(|| bad("weight"))?;
    let s = side.meta["summary"]["trace_exponent_s"].as_f64().ok_or_else(|| bad("s"))?;
    if eig.len() != k {
        return Err(bad("eigenvalue count"));
    }
    let vectors = faer::Mat::from_fn(dim, k, |i, c| flat[i * k + c]);
    Ok(crate::SpectralData::from_parts(grid, weight, eig, vectors, s))
}
