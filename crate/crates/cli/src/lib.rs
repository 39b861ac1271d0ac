//! Command-line harness for the `simd_redc` library.

pub mod config;
pub mod count;
pub mod examples;
pub mod validate;

use std::fmt;

use clap::{Parser, Subcommand};
use serde::Serialize;
use simd_redc::field::Backend;
use simd_redc::field::FieldContext;
use simd_redc::mont_generic::{redc_proposed, redc_reference, PrimeContext};
use simd_redc::mont_special::{redc_friendly_proposed, redc_friendly_reference, FriendlyContext};
use simd_redc::BigInt;

use config::{resolve, Resolved, RunArgs};
use count::Op;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "simd-redc", version, about = "Carry-simulated addition and Montgomery reduction harness")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the oracle-equivalence and invariant suites
    Validate {
        /// Perturb the precomputed constant M_i before its consistency check
        #[arg(long, hide = true, value_name = "I")]
        corrupt_precompute: Option<usize>,
    },
    /// Replay the worked examples and compare every intermediate
    Examples,
    /// Report operation counts and weighted cycles as JSON
    Count {
        /// Operations to count: add, sub, redc, all or none
        #[arg(long, value_delimiter = ',', default_value = "all")]
        ops: Vec<String>,
        /// Also time each operation (wall clock, machine dependent)
        #[arg(long)]
        bench: bool,
    },
    /// Reduce T: print T R^-1 mod p
    Redc {
        /// Hexadecimal T below pR
        t: String,
    },
    /// Multiply in the field: print a b mod p
    Mulmod {
        /// Hexadecimal a below p
        a: String,
        /// Hexadecimal b below p
        b: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags, config or operands.
    Config(String),
    /// A check failed.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Failed(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Text to print plus the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn operand(text: &str, r: &Resolved, width: usize) -> Result<BigInt, CliError> {
    let probe = r.cfg.with_limbs(1).map_err(|e| CliError::Config(e.to_string()))?;
    let x = BigInt::from_hex(text, probe).map_err(|e| CliError::Config(format!("operand {text:?}: {e}")))?;
    let cfg = r.cfg.with_limbs(width.max(x.significant_limbs())).map_err(|e| CliError::Config(e.to_string()))?;
    x.in_config(cfg).map_err(|e| CliError::Config(e.to_string()))
}

fn precondition(e: simd_redc::Error) -> CliError {
    CliError::Config(format!("precondition violated: {e}"))
}

pub fn cmd_redc(r: &Resolved, t: &str) -> Result<BigInt, CliError> {
    let n = r.cfg.limbs();
    let t = operand(t, r, 2 * n + 1)?;
    let unavailable = |e: simd_redc::Error| CliError::Config(format!("backend {}: {e}", r.backend));
    match r.backend {
        Backend::GenericReference | Backend::GenericProposed => {
            let ctx =
                PrimeContext::new(&r.p, r.cfg).and_then(|c| c.with_strategy(r.strategy())).map_err(unavailable)?;
            if r.backend == Backend::GenericReference {
                redc_reference(&t, &ctx).map_err(precondition)
            } else {
                redc_proposed(&t, &ctx).map(|x| x.0).map_err(precondition)
            }
        }
        Backend::FriendlyReference | Backend::FriendlyProposed => {
            let ctx =
                FriendlyContext::new(&r.p, r.cfg).and_then(|c| c.with_strategy(r.strategy())).map_err(unavailable)?;
            if r.backend == Backend::FriendlyReference {
                redc_friendly_reference(&t, &ctx).map_err(precondition)
            } else {
                if !ctx.admissible() {
                    return Err(CliError::Config(format!("backend {} is not admissible for this prime", r.backend)));
                }
                redc_friendly_proposed(&t, &ctx).map(|x| x.0).map_err(precondition)
            }
        }
    }
}

pub fn cmd_mulmod(r: &Resolved, a: &str, b: &str) -> Result<BigInt, CliError> {
    let n = r.cfg.limbs();
    let (a, b) = (operand(a, r, n + 1)?, operand(b, r, n + 1)?);
    let f = FieldContext::new(&r.p, r.cfg, r.backend).map_err(|e| CliError::Config(e.to_string()))?;
    let (x, y) = (f.to_mont(&a).map_err(precondition)?, f.to_mont(&b).map_err(precondition)?);
    let prod = f.fmul(&x, &y).map_err(|e| CliError::Failed(e.to_string()))?;
    f.from_mont(&prod).map_err(|e| CliError::Failed(e.to_string()))
}

#[derive(Serialize)]
struct HexResult {
    result: String,
}

fn hex_output(r: &Resolved, x: &BigInt) -> String {
    if r.json {
        json(&HexResult { result: x.to_hex() })
    } else {
        format!("{}\n", x.to_hex())
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    if let Command::Examples = cli.command {
        let report = examples::run();
        let stdout = if cli.run.json { json(&report) } else { report.to_text() };
        return Ok(Outcome { stdout, code: if report.passed { EXIT_PASS } else { EXIT_FAILURE } });
    }
    let r = resolve(&cli.run)?;
    Ok(match &cli.command {
        Command::Examples => unreachable!(),
        Command::Validate { corrupt_precompute } => {
            let report = validate::run(&r, *corrupt_precompute);
            let stdout = if r.json { json(&report) } else { report.to_text() };
            Outcome { stdout, code: if report.passed { EXIT_PASS } else { EXIT_FAILURE } }
        }
        Command::Count { ops, bench } => {
            let report = count::run(&r, &Op::parse_list(ops)?, *bench)?;
            let code = if report.shape_deterministic { EXIT_PASS } else { EXIT_FAILURE };
            Outcome { stdout: json(&report), code }
        }
        Command::Redc { t } => Outcome { stdout: hex_output(&r, &cmd_redc(&r, t)?), code: EXIT_PASS },
        Command::Mulmod { a, b } => Outcome { stdout: hex_output(&r, &cmd_mulmod(&r, a, b)?), code: EXIT_PASS },
    })
}

/// Runs a parsed command line. Errors become a message on stderr and an exit code.
pub fn run(cli: &Cli) -> (Outcome, Option<String>) {
    match dispatch(cli) {
        Ok(out) => (out, None),
        Err(e) => (Outcome { stdout: String::new(), code: e.exit_code() }, Some(e.to_string())),
    }
}
