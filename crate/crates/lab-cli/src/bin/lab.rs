use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lab_cli::{emit_plot_data, run, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run lab experiments and emit plot data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment(s) named in the config and write a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `experiment`.
        #[arg(long)]
        experiment: Option<String>,
        /// Overrides `mc.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `mc.workers`.
        #[arg(long, env = "LAB_WORKERS")]
        workers: Option<usize>,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the long-format CSV of one experiment's plot data.
    Plot {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        which: String,
        /// Directory for the CSV (default: next to the manifest).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(2)
        }
    }
}

fn real_main() -> lab_cli::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run {
            config,
            experiment,
            seed,
            workers,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(e) = experiment {
                cfg.experiment = e.parse::<Experiment>()?;
            }
            if let Some(s) = seed {
                cfg.mc.seed = s;
            }
            if let Some(w) = workers {
                cfg.mc.workers = w;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let manifest = run(&cfg)?;
            for e in &manifest.entries {
                let status = match e.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "----",
                };
                let c = e.criterion.map(|c| format!("{c:>2}")).unwrap_or_else(|| " -".into());
                println!("{c} {status} {}/{}", e.experiment, e.name);
            }
            println!("manifest: {}", cfg.output_dir.join(lab_cli::MANIFEST_FILE).display());
            Ok(if manifest.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Plot { manifest, which, out } => {
            let path = emit_plot_data(&manifest, &which, out.as_deref())?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
