use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use eegspect::catalog::{build_catalog, CATALOG_FILE};
use eegspect::config::PipelineConfig;
use eegspect::pipeline;
use eegspect::synth::{write_corpus, SynthConfig};
use log::{error, info, warn};

/// Exit codes: 0 success, 1 fatal error, 2 partial result (inputs skipped).
#[derive(Parser)]
#[command(name = "eegspect", version, about = "EEG seizure spectral representation pipeline")]
struct Cli {
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true, env = "EEGSPECT_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a directory of EDF files and summaries into catalog.json.
    Catalog {
        dir: PathBuf,
        /// Output path; defaults to <dir>/catalog.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline described by a TOML config.
    Run {
        #[arg(long, required_unless_present = "print_config")]
        config: Option<PathBuf>,
        /// Print the effective config (defaults merged in) and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Write the synthetic EDF corpus and its summary file.
    Synth {
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Outcome {
    Done,
    Partial,
}

fn catalog(dir: PathBuf, out: Option<PathBuf>) -> anyhow::Result<Outcome> {
    let report = build_catalog(&dir).context("catalog")?;
    for w in &report.warnings {
        warn!("{w}");
    }
    for (path, reason) in &report.skipped {
        warn!("skipped {}: {reason}", path.display());
    }
    let out = out.unwrap_or_else(|| dir.join(CATALOG_FILE));
    report.catalog.save(&out).with_context(|| format!("writing {}", out.display()))?;
    info!("{} entries written to {}", report.catalog.entries.len(), out.display());
    Ok(if report.is_partial() { Outcome::Partial } else { Outcome::Done })
}

fn run(config: Option<PathBuf>, print_config: bool) -> anyhow::Result<Outcome> {
    let config = match &config {
        Some(path) => PipelineConfig::load(path).with_context(|| format!("config {}", path.display()))?,
        None => PipelineConfig::default(),
    };
    if print_config {
        print!("{}", config.to_toml());
        return Ok(Outcome::Done);
    }
    let summary = pipeline::run(&config)?;
    info!(
        "{} outputs in {} ({} cached feature sets)",
        summary.outputs.len(),
        config.output_dir.display(),
        summary.cache_hits
    );
    Ok(if summary.is_partial() { Outcome::Partial } else { Outcome::Done })
}

fn synth(seed: u64, out: PathBuf) -> anyhow::Result<Outcome> {
    let recordings = write_corpus(&SynthConfig::with_seed(seed), &out)?;
    info!("{} recordings written to {}", recordings.len(), out.display());
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n);
    }
    if let Err(e) = pool.build_global() {
        error!("cannot start worker pool: {e}");
        return ExitCode::from(1);
    }

    let result = match cli.command {
        Command::Catalog { dir, out } => catalog(dir, out),
        Command::Run { config, print_config } => run(config, print_config),
        Command::Synth { seed, out } => synth(seed, out),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(1)
        }
    }
}
