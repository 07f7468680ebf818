use std::path::Path;

use schrodinger_core::persist::write_array;

use crate::error::{FieldError, Result};
use crate::sampler::FieldBatch;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InteractionRow {
    pub sample_index: u64,
    #[serde(rename = "V_N")]
    pub v_n: f64,
    #[serde(rename = "V_eps")]
    pub v_eps: f64,
    #[serde(rename = "W_eps")]
    pub w_eps: f64,
}

pub fn write_interaction_csv(path: &Path, rows: &[InteractionRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_interaction_csv(path: &Path) -> Result<Vec<InteractionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(FieldError::from)).collect()
}

/// Persist the complex coordinates of a batch (modes x samples x 2).
pub fn save_batch(stem: &Path, batch: &FieldBatch, spectral_checksum: &str) -> Result<()> {
    let k = batch.coords_re.nrows();
    let b = batch.len();
    let mut flat = Vec::with_capacity(k * b * 2);
    for j in 0..k {
        for s in 0..b {
            flat.push(batch.coords_re[(j, s)]);
            flat.push(batch.coords_im[(j, s)]);
        }
    }
    let meta = serde_json::json!({
        "seed": batch.seed,
        "N": batch.n_cut,
        "cutoff": batch.cutoff,
        "batch_size": b,
        "first_index": batch.first_index,
        "modes": batch.modes,
        "spectral_checksum": spectral_checksum,
    });
    write_array(stem, &flat, &[k, b, 2], meta)?;
    Ok(())
}
