use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::experiments::{run_experiment, Context};
use crate::manifest::{ManifestEntry, Metrics, RunInfo, RunManifest};
use crate::plot::PlotData;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_INFO_FILE: &str = "run_info.json";
pub const CONFIG_FILE: &str = "config.json";

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

/// Run the configured experiment(s) into `cfg.output_dir` and return the
/// manifest (also written to `manifest.json`).
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let out = cfg.output_dir.as_path();
    std::fs::create_dir_all(out.join("plots")).map_err(|e| LabError::io(out, e))?;
    let started = unix_now();
    let ctx = Context::new(cfg, out);
    let list: Vec<Experiment> = match cfg.experiment {
        Experiment::All => Experiment::SINGLE.to_vec(),
        e => vec![e],
    };
    let mut entries = Vec::new();
    let mut seconds = BTreeMap::new();
    for &e in &list {
        let t0 = Instant::now();
        let result = run_experiment(&ctx, e)?;
        seconds.insert(e.name().to_string(), t0.elapsed().as_secs_f64());
        let plot_path = PlotData::path_in(out, e.name());
        write(&plot_path, &serde_json::to_string(&result.plot)?)?;
        for mut entry in result.entries {
            entry.artifacts.push(format!("plots/{}.json", e.name()));
            entries.push(entry);
        }
    }
    let mut experiments: Vec<String> = list.iter().map(|e| e.name().to_string()).collect();
    if cfg.experiment == Experiment::All {
        let mut m = Metrics::new();
        m.set("digest", RunManifest::digest_of(&entries))
            .set("rule", "byte-identical manifest.json from two runs with the same config, seed and workers");
        entries.push(ManifestEntry::new(Some(14), "all", "determinism", None, m));
        experiments.push("all".to_string());
    }
    let manifest = RunManifest {
        config_hash: cfg.hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.mc.seed,
        experiments,
        entries,
    };
    manifest.write(&out.join(MANIFEST_FILE))?;
    write(&out.join(CONFIG_FILE), &cfg.to_json())?;
    let info = RunInfo {
        started_unix: started,
        finished_unix: unix_now(),
        workers: cfg.mc.workers,
        seconds,
    };
    write(&out.join(RUN_INFO_FILE), &serde_json::to_string_pretty(&info)?)?;
    Ok(manifest)
}
