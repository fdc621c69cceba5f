//! `retina`: precompute motion maps, generate synthetic sequences, score
//! detections, inspect automaton layers and exercise the PMI toy.

mod eval_cmd;
mod inspect;
mod output;
mod pmi_demo;
mod precompute;
mod synth_cmd;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use retina_core::{Error, RcaParams};

/// Failure surfaced to the user as one diagnostic line.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, flags or environment (exit 1).
    User { code: &'static str, detail: String },
    /// Broken internal invariant (exit 2).
    Internal(String),
}

impl Failure {
    pub fn user(code: &'static str, detail: impl Into<String>) -> Self {
        Failure::User {
            code,
            detail: detail.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_) => Failure::Internal(format!("dimension: {e}")),
            other => Failure::User {
                code: other.code(),
                detail: other.to_string(),
            },
        }
    }
}

impl Failure {
    /// Like `From<Error>`, but line-level errors are prefixed with `path`.
    pub fn in_file(path: &Path, e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Config { .. } => Failure::User {
                code: e.code(),
                detail: format!("{}: {e}", path.display()),
            },
            other => other.into(),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Parser, Debug)]
#[command(name = "retina", version, about = "Retina-inspired motion maps for infrared sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turn frame sequences into motion maps, one map per frame.
    Precompute(precompute::Args),
    /// Write a seeded synthetic sequence with ground-truth boxes.
    Synth(synth_cmd::Args),
    /// Score detections against ground truth (P, R, F1, AP@50).
    Eval(eval_cmd::Args),
    /// Dump every automaton layer for one frame of a sequence.
    Inspect(inspect::Args),
    /// Run the cross-attention block on random features and check its invariants.
    PmiDemo(pmi_demo::Args),
}

/// Parameters from `path`, or the defaults.
pub fn resolve_params(path: Option<&Path>) -> Result<RcaParams, Failure> {
    match path {
        Some(p) => RcaParams::load(p).map_err(|e| Failure::in_file(p, e)),
        None => Ok(RcaParams::default()),
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Precompute(a) => precompute::run(a),
        Command::Synth(a) => synth_cmd::run(a),
        Command::Eval(a) => eval_cmd::run(a),
        Command::Inspect(a) => inspect::run(a),
        Command::PmiDemo(a) => pmi_demo::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    panic::set_hook(Box::new(|_| {}));
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(cli)));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::User { code, detail })) => {
            eprintln!("error: {code}: {detail}");
            ExitCode::from(1)
        }
        Ok(Err(Failure::Internal(detail))) => {
            eprintln!("error: internal: {detail}");
            ExitCode::from(2)
        }
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            eprintln!("error: internal: {}", detail.replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
