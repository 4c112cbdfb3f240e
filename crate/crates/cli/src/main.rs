//! `emrkit`: derive metamorphic relations from requirements, convert them
//! into executable EMRs, run them against a system under test and grade
//! the results.

mod commands;
mod config;
mod exit;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emrkit_sut::Fault;

use crate::config::{StubSet, ToolConfig};
use crate::exit::{CliError, Exit};

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  internal error
  2  bad input (missing file, schema, ingestion, parse or validation error)
  3  language model failure (transport, missing mock script, malformed reply)
  4  nothing produced (every MR failed to convert, or a document gave no MR)
  5  at least one Fail verdict
  6  SUT adapter failure
  7  an EMR is not executable (unbound function)
For `run`, adapter failure (6) outranks evaluation errors (2), which outrank
not-executable (7), which outranks Fail (5).";

#[derive(Parser)]
#[command(name = "emrkit", version, about, after_help = EXIT_CODES)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct Global {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Replay scripted LLM replies instead of calling the model.
    #[arg(long, global = true)]
    pub mock: bool,
    /// Mock script file (implies --mock).
    #[arg(long, global = true)]
    pub scripts: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Progress messages on stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Derive MRs from requirements documents (writes mrs.json and transcripts).
    Derive {
        #[arg(required = true)]
        docs: Vec<PathBuf>,
        /// Succeed even when a document yields no MR.
        #[arg(long)]
        allow_empty: bool,
    },
    /// Convert MRs into EMRs (writes emrs/ and transcripts).
    Generate {
        /// MR catalog produced by `derive`.
        #[arg(long)]
        mrs: PathBuf,
        /// API catalog of the SUT.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Derive MRs and convert them in one go.
    Pipeline {
        #[arg(required = true)]
        docs: Vec<PathBuf>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        allow_empty: bool,
    },
    /// Parse and validate EMR files, listing diagnostics and stubs.
    Check {
        /// EMR files or directories of `*.smrl` files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Also list every statement line with its Simple/Complex class.
        #[arg(long)]
        lines: bool,
    },
    /// Apply the automatic repairs to an EMR source.
    Repair {
        file: PathBuf,
        /// Rewrite the file instead of printing the result.
        #[arg(long)]
        write: bool,
        /// Where to write the JSON-lines repair log (default: stderr).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Execute EMRs against the SUT and report verdicts.
    Run {
        /// Directory of `*.smrl` files (default: <out>/emrs).
        #[arg(long)]
        emrs: Option<PathBuf>,
        /// Directory of JSON input sequences (default: the built-in shop inputs).
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// TOML file with the SUT section.
        #[arg(long)]
        sut: Option<PathBuf>,
        /// Seed a mock-shop fault (repeatable).
        #[arg(long = "fault")]
        faults: Vec<Fault>,
        #[arg(long, value_enum)]
        stubs: Option<StubSet>,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Label distribution of annotated EMRs, plus suite size statistics.
    Grade {
        #[arg(long)]
        emrs: PathBuf,
        /// JSON-lines annotations.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Aggregate Likert survey responses.
    Survey { file: PathBuf },
    /// Print the resolved configuration with every default filled in.
    ShowConfig,
}

fn resolve(global: &Global) -> Result<ToolConfig, CliError> {
    let mut config = match &global.config {
        Some(path) => ToolConfig::load(path)?,
        None => ToolConfig::default(),
    };
    if let Some(out) = &global.out {
        config.out = out.clone();
    }
    if let Some(s) = &global.scripts {
        config.mock_scripts = Some(s.clone());
        config.mock = true;
    }
    if global.mock {
        config.mock = true;
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<Exit, CliError> {
    let config = resolve(&cli.global)?;
    let ctx = commands::Context {
        config,
        verbose: cli.global.verbose,
    };
    match cli.command {
        Command::Derive { docs, allow_empty } => commands::derive(&ctx, &docs, allow_empty),
        Command::Generate { mrs, catalog } => commands::generate(&ctx, &mrs, catalog.as_deref()),
        Command::Pipeline {
            docs,
            catalog,
            allow_empty,
        } => commands::pipeline(&ctx, &docs, catalog.as_deref(), allow_empty),
        Command::Check { paths, catalog, lines } => commands::check(&ctx, &paths, catalog.as_deref(), lines),
        Command::Repair { file, write, log } => commands::repair(&file, write, log.as_deref()),
        Command::Run {
            emrs,
            inputs,
            sut,
            faults,
            stubs,
            catalog,
        } => commands::run(
            &ctx,
            commands::RunArgs {
                emrs,
                inputs,
                sut,
                faults,
                stubs,
                catalog,
            },
        ),
        Command::Grade { emrs, annotations } => commands::grade(&ctx, &emrs, annotations.as_deref()),
        Command::Survey { file } => commands::survey(&ctx, &file),
        Command::ShowConfig => {
            print!("{}", ctx.config.to_toml());
            Ok(Exit::Ok)
        }
    }
}

fn main() -> ExitCode {
    // Exit quietly when stdout is closed early, as in `emrkit check | head`.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(exit) => ExitCode::from(exit.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit.code())
        }
    }
}
