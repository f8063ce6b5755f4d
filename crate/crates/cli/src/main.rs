//! `webster`: ear-canal area functions and eardrum transfer impedances from
//! input-impedance CSV files.
//!
//! Exit status is 0 on success, 2 when the result is usable but flagged
//! (see the `warnings` of the diagnostics), and 1 on error. Errors are
//! reported on stderr as one JSON object with a machine-readable `code`.

mod commands;
mod horn;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{LengthSource, Outcome};
use horn::{HornKind, SynthArgs};
use settings::PipelineArgs;

#[derive(Debug, Parser)]
#[command(name = "webster", version, about = "Ear-canal area functions from input impedance")]
struct Cli {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Area function and termination lengths from a Z_ec CSV.
    Estimate {
        zec: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Reference transfer impedance, needed by `--termination lme`.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Transfer impedance of an area function cut at a termination length.
    Ztrans {
        zec: PathBuf,
        area: PathBuf,
        /// Termination depth, mm.
        #[arg(long, conflicts_with = "from")]
        length_mm: Option<f64>,
        /// termination.json from `estimate`. Uses its selected length unless
        /// `--termination` names another rule.
        #[arg(long)]
        from: Option<PathBuf>,
        #[arg(long, default_value = "ztrans.csv")]
        out: PathBuf,
    },
    /// Synthetic geometry with its Z_ec and reference Z_trans.
    GenHorn {
        #[command(subcommand)]
        kind: HornKind,
        #[command(flatten)]
        synth: SynthArgs,
        /// Tabulated load impedance CSV at the medial end (rigid if absent).
        #[arg(long, global = true)]
        load: Option<PathBuf>,
        #[arg(long, global = true, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Synthesize, estimate and score against the synthetic reference.
    Roundtrip {
        #[command(subcommand)]
        kind: HornKind,
        #[command(flatten)]
        synth: SynthArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Mean least level error over a dataset for every (f_sup, f_cut).
    Sweep {
        /// Directory of items, each a subdirectory with zec.csv and ztrans_ref.csv.
        dataset: PathBuf,
        /// Cutoffs in kHz: `20,24,28` or `8:44:1`.
        #[arg(long)]
        f_cut_grid: String,
        /// Sampling rates in kHz.
        #[arg(long, default_value = "3500")]
        f_sup_grid: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let settings = cli.pipeline.resolve()?;
    match &cli.command {
        Command::Estimate { zec, out_dir, reference } => commands::cmd_estimate(zec, out_dir, reference.as_deref(), &settings),
        Command::Ztrans { zec, area, length_mm, from, out } => {
            let source = match (length_mm, from) {
                (Some(mm), None) => LengthSource::Fixed(mm * 1e-3),
                (None, Some(p)) => {
                    let rule = cli.pipeline.termination.is_some().then_some(settings.pipeline.termination);
                    LengthSource::File(p.clone(), rule)
                }
                (None, None) => match settings.pipeline.termination {
                    webster_core::TerminationRule::Fixed(x) if cli.pipeline.termination.is_some() => LengthSource::Fixed(x),
                    _ => bail!("ztrans needs --length-mm, --from or --termination fixed:<mm>"),
                },
                (Some(_), Some(_)) => unreachable!("clap rejects both"),
            };
            commands::cmd_ztrans(zec, area, &source, out, &settings)
        }
        Command::GenHorn { kind, synth, load, out_dir } => commands::cmd_genhorn(kind, synth, load.as_deref(), out_dir, &settings),
        Command::Roundtrip { kind, synth, out } => commands::cmd_roundtrip(kind, synth, out.as_deref(), &settings),
        Command::Sweep { dataset, f_cut_grid, f_sup_grid, out_dir } => {
            commands::cmd_sweep(dataset, f_cut_grid, f_sup_grid, out_dir, &settings)
        }
    }
}

fn error_code(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(w) = cause.downcast_ref::<webster_core::Error>() {
            return w.code();
        }
        if cause.is::<toml::de::Error>() || cause.is::<serde_json::Error>() {
            return "Parse";
        }
        if cause.is::<std::io::Error>() {
            return "Io";
        }
    }
    "InvalidArgument"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Degraded) => ExitCode::from(2),
        Err(e) => {
            let report = json!({ "error": { "code": error_code(&e), "message": format!("{e:#}") } });
            eprintln!("{report}");
            ExitCode::from(1)
        }
    }
}
