//! The `freqdenoise` command line: `synth`, `train`, `eval` and `denoise`.
//!
//! Exit codes: 0 on success, 1 on runtime failures, 2 on usage and
//! validation errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{cmd_denoise, cmd_eval, cmd_synth, cmd_train, TrainSummary};
pub use config::{DataPaths, DataSection, ModelSection, RunConfig};

pub const THREADS_ENV: &str = "FREQDENOISE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    std::io::Error,
    crate::data::DataError,
    crate::tensor::TensorError,
    crate::model::ModelError,
    crate::model::WeightsError,
    crate::training::TrainError,
    crate::metrics::MetricsError,
    serde_json::Error
);

#[derive(Debug, Parser)]
#[command(name = "freqdenoise", version, about = "Frequency-conditioned EEG artifact removal")]
pub struct Cli {
    /// Worker threads; falls back to $FREQDENOISE_THREADS, then 1.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArtifactChoice {
    Eog,
    Emg,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write synthetic EEG, EOG and EMG corpora as EDNB files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 512)]
        length: usize,
    },
    /// Train a model from a JSON run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Score weights on the test split over the SNR grid.
    Eval {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        artifact: ArtifactChoice,
        /// Mixture seed; defaults to the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report directory; defaults to `<output_dir>/eval`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Denoise recorded segments given per-segment noise PSDs.
    Denoise {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// CSV, one row of N/2+1 PSD values per input segment.
        #[arg(long)]
        noise_psd: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Writes `segment_NNNN.csv` traces (timestep,noisy,denoised).
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
}

/// `--threads`, else the environment variable, else 1.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={s:?} is not a count")))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err(CliError::Usage("threads: must be at least 1".into()));
    }
    Ok(n)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let threads = resolve_threads(cli.threads)?;
    match cli.command {
        Command::Synth {
            out,
            count,
            seed,
            length,
        } => cmd_synth(&out, count, seed, length),
        Command::Train { config, resume } => cmd_train(&config, resume.as_deref(), threads).map(|_| ()),
        Command::Eval {
            weights,
            config,
            artifact,
            seed,
            out,
        } => cmd_eval(&weights, &config, artifact, seed, out.as_deref(), threads).map(|_| ()),
        Command::Denoise {
            weights,
            input,
            noise_psd,
            out,
            trace_dir,
        } => cmd_denoise(&weights, &input, &noise_psd, &out, trace_dir.as_deref()),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
