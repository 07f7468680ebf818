//! Plot data: each experiment stores named series of numeric rows in
//! `<out>/plots/<experiment>.json`; `emit_plot_data` turns one of them into
//! a long-format CSV with a leading `series` column.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    /// Missing values (NaN) are stored as JSON `null`.
    #[serde(with = "nan_as_null")]
    pub rows: Vec<Vec<f64>>,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x.is_finite().then_some(*x)).collect())
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let v: Vec<Vec<Option<f64>>> = Vec::deserialize(d)?;
        Ok(v.into_iter()
            .map(|r| r.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub experiment: String,
    pub columns: Vec<String>,
    pub series: Vec<PlotSeries>,
}

impl PlotData {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, rows: Vec<Vec<f64>>) {
        debug_assert!(rows.iter().all(|r| r.len() == self.columns.len()));
        self.series.push(PlotSeries { name: name.into(), rows });
    }

    pub fn path_in(out: &Path, experiment: &str) -> PathBuf {
        out.join("plots").join(format!("{experiment}.json"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["series".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for s in &self.series {
            for row in &s.rows {
                let mut rec = vec![s.name.clone()];
                rec.extend(row.iter().map(|v| if v.is_finite() { v.to_string() } else { String::new() }));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| LabError::io(path, e))?;
        Ok(())
    }
}

/// Write `plot_<which>.csv` next to the manifest (or into `out`) and return
/// its path.
pub fn emit_plot_data(manifest_path: &Path, which: &str, out: Option<&Path>) -> Result<PathBuf> {
    let manifest = RunManifest::load(manifest_path)?;
    if !manifest.has_experiment(which) {
        return Err(LabError::MissingExperiment(which.to_string()));
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let src = PlotData::path_in(dir, which);
    let text = std::fs::read_to_string(&src).map_err(|e| LabError::io(&src, e))?;
    let data: PlotData = serde_json::from_str(&text)?;
    let target_dir = out.unwrap_or(dir);
    std::fs::create_dir_all(target_dir).map_err(|e| LabError::io(target_dir, e))?;
    let target = target_dir.join(format!("plot_{which}.csv"));
    data.write_csv(&target)?;
    Ok(target)
}
