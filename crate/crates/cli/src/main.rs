mod commands;
mod config;

use clap::{Parser, Subcommand};

use commands::{bench, eval, gen, register};

pub const EXIT_OK: i32 = 0;
/// Parse, I/O or configuration problem.
pub const EXIT_USAGE: i32 = 1;
/// The pipeline ran but produced no usable registration.
pub const EXIT_NO_REGISTRATION: i32 = 2;

#[derive(Parser)]
#[command(
    name = "gc-register",
    version,
    about = "Point cloud registration with multi-scale descriptor voting",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a source cloud onto a target cloud and write a JSON report.
    Register(register::RegisterArgs),
    /// Run every pair of a manifest and write suite outputs (JSON + CSV).
    Bench(bench::BenchArgs),
    /// Generate synthetic cloud pairs with ground truth and a manifest.
    Gen(gen::GenArgs),
    /// Score estimated transforms against a manifest's ground truth.
    Eval(eval::EvalArgs),
}

/// A failure carrying its exit code. `json_errors` selects the stderr
/// format; stdout stays reserved for data either way.
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<gcreg_core::Error> for Failure {
    fn from(e: gcreg_core::Error) -> Self {
        let code = match &e {
            gcreg_core::Error::NoConsensus { .. } => EXIT_NO_REGISTRATION,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let (result, json_errors) = match cli.command {
        Command::Register(args) => {
            let json = args.pipeline.json;
            (register::run(args), json)
        }
        Command::Bench(args) => {
            let json = args.pipeline.json;
            (bench::run(args), json)
        }
        Command::Gen(args) => {
            let json = args.json;
            (gen::run(args), json)
        }
        Command::Eval(args) => {
            let json = args.pipeline.json;
            (eval::run(args), json)
        }
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(failure) => {
            if json_errors {
                let body = serde_json::json!({
                    "error": failure.message,
                    "exit_code": failure.code,
                });
                eprintln!("{body}");
            } else {
                eprintln!("error: {}", failure.message);
            }
            std::process::exit(failure.code);
        }
    }
}
