//! `tracefix trace | repair | serve`.
//!
//! Exit codes: 0 on success, 2 on input errors or runtime faults, 3 when no
//! repair exists within the bounds.

mod repair;

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;
use tracefix_core::lang::{parse_program, Program};
use tracefix_core::tracer::{decode_input, execute, DEFAULT_FUEL};
use tracefix_service::{serve, ServiceConfig};

pub const DEFAULT_PORT: u16 = 7878;

#[derive(Parser)]
#[command(
    name = "tracefix",
    version,
    about = "Repair programs by editing values in their traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the execution trace of a program as JSON.
    Trace {
        program: PathBuf,
        /// Entry-function arguments: a JSON object, or a path to one.
        #[arg(long)]
        input: String,
        /// Maximum number of configurations.
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Repair a program against a manipulation file.
    Repair(repair::RepairArgs),
    /// Serve the HTTP API and the UI bundle.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

/// A failure with its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read_file(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Parses `text` as JSON, or reads it as a file when it is not JSON.
fn json_arg(text: &str) -> Result<Value, Failure> {
    match serde_json::from_str(text) {
        Ok(v) => Ok(v),
        Err(_) => {
            let body = read_file(Path::new(text))?;
            serde_json::from_str(&body).map_err(|e| Failure::input(format!("{text}: {e}")))
        }
    }
}

/// Prints `v` to stdout; a closed pipe is not an error.
pub fn print_json(v: &Value) {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn cmd_trace(program: &Path, input: &str, fuel: usize) -> Result<(), Failure> {
    let p = load_program(program)?;
    let Value::Object(input) = json_arg(input)? else {
        return Err(Failure::input("--input must be a JSON object"));
    };
    let initial = decode_input(&p, &input).map_err(Failure::input)?;
    match execute(&p, &initial, fuel) {
        Ok(t) => {
            print_json(&t.to_json());
            Ok(())
        }
        Err(e) => {
            print_json(&e.partial.to_json());
            Err(Failure::input(e.fault))
        }
    }
}

fn cmd_serve(port: u16, static_dir: Option<PathBuf>) -> Result<(), Failure> {
    let runtime = tokio::runtime::Runtime::new().map_err(Failure::input)?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::input(format!("cannot listen on {addr}: {e}")))?;
        eprintln!(
            "listening on http://{}",
            listener.local_addr().map_err(Failure::input)?
        );
        let config = ServiceConfig {
            static_dir,
            ..ServiceConfig::default()
        };
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve(listener, config, shutdown)
            .await
            .map_err(Failure::input)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Trace {
            program,
            input,
            fuel,
        } => cmd_trace(&program, &input, fuel),
        Command::Repair(args) => repair::run(&args),
        Command::Serve { port, static_dir } => cmd_serve(port, static_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
