mod commands;
mod manifest;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use cubecover::{Error, Limits};
use serde_json::json;

use commands::Report;
use manifest::{Inputs, RunManifest};

const POINT_CAP_VAR: &str = "CUBECOVER_POINT_CAP";

/// Covering systems, subcube covers of the Boolean cube, and distinct-tautology search.
#[derive(Debug, Parser)]
#[command(name = "cubecover", version)]
struct Cli {
    /// Emit a JSON document (with run manifest) instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a congruence file is a covering system.
    VerifyCovsys(commands::VerifyCovsys),
    /// Map a square-free congruence system to sub-boxes of its prime box.
    CrtMap(commands::CrtMap),
    /// Check a DNF file for tautology, distinctness and exactness.
    DnfCheck(commands::DnfCheck),
    /// Write the pigeonhole tautology on n variables.
    DnfConstruct(commands::DnfConstruct),
    /// Tabulate the density bounds A(n) or B(n).
    Bounds(commands::Bounds),
    /// Search for a distinct tautology with large or uniform term size.
    Search(commands::Search),
    /// Check a sub-box cover of a mixed-radix box.
    BoxCheck(commands::BoxCheck),
}

/// Exit codes shared by every subcommand.
mod exit {
    pub const SUCCESS: u8 = 0;
    pub const NEGATIVE: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const UNSUPPORTED: u8 = 3;
    pub const CAPACITY: u8 = 4;
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Unsupported(_)) => exit::UNSUPPORTED,
        Some(Error::Capacity(_)) => exit::CAPACITY,
        Some(Error::Integrity(_)) => exit::NEGATIVE,
        _ => exit::INPUT,
    }
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => "parse",
        Some(Error::Capacity(_)) => "capacity",
        Some(Error::Unsupported(_)) => "unsupported",
        Some(Error::Domain(_)) => "domain",
        Some(Error::Contract(_)) => "contract",
        Some(Error::Integrity(_)) => "integrity",
        None => "io",
    }
}

fn limits_from_env() -> anyhow::Result<Limits> {
    let mut limits = Limits::default();
    if let Ok(raw) = std::env::var(POINT_CAP_VAR) {
        let cap: u64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("{POINT_CAP_VAR} must be a positive integer, got `{raw}`")))?;
        if cap == 0 {
            return Err(Error::Domain(format!("{POINT_CAP_VAR} must be positive")).into());
        }
        limits.point_cap = cap;
    }
    Ok(limits)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let (name, args, seed) = cli.command.describe();

    let result = limits_from_env().and_then(|limits| cli.command.run(&limits, &mut inputs).map(|r| (r, limits)));
    let point_cap = result.as_ref().map_or(Limits::default().point_cap, |(_, l)| l.point_cap);
    let manifest = RunManifest::new(name, args, inputs, seed, point_cap, start.elapsed());

    match result {
        Ok((report, _)) => {
            let Report {
                text,
                mut json,
                code,
                json_file,
            } = report;
            json["manifest"] = serde_json::to_value(&manifest).expect("manifest serializes");
            let doc = serde_json::to_string_pretty(&json).expect("report serializes");
            if let Some(path) = json_file {
                if let Err(e) = std::fs::write(&path, format!("{doc}\n")) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(exit::INPUT);
                }
            }
            if cli.json {
                emit(&format!("{doc}\n"));
            } else {
                emit(&text);
            }
            ExitCode::from(code)
        }
        Err(err) => {
            let code = exit_code(&err);
            if cli.json {
                let doc = json!({
                    "error": { "kind": error_kind(&err), "message": format!("{err:#}") },
                    "exit_code": code,
                    "manifest": manifest,
                });
                emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("error serializes")));
            }
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

impl Command {
    fn describe(&self) -> (&'static str, serde_json::Value, Option<u64>) {
        let to = |v: Result<serde_json::Value, _>| v.expect("arguments serialize");
        match self {
            Command::VerifyCovsys(a) => ("verify-covsys", to(serde_json::to_value(a)), None),
            Command::CrtMap(a) => ("crt-map", to(serde_json::to_value(a)), None),
            Command::DnfCheck(a) => ("dnf-check", to(serde_json::to_value(a)), None),
            Command::DnfConstruct(a) => ("dnf-construct", to(serde_json::to_value(a)), None),
            Command::Bounds(a) => ("bounds", to(serde_json::to_value(a)), None),
            Command::Search(a) => ("search", to(serde_json::to_value(a)), Some(a.seed)),
            Command::BoxCheck(a) => ("box-check", to(serde_json::to_value(a)), None),
        }
    }

    fn run(&self, limits: &Limits, inputs: &mut Inputs) -> anyhow::Result<Report> {
        match self {
            Command::VerifyCovsys(a) => a.run(limits, inputs),
            Command::CrtMap(a) => a.run(limits, inputs),
            Command::DnfCheck(a) => a.run(limits, inputs),
            Command::DnfConstruct(a) => a.run(),
            Command::Bounds(a) => a.run(),
            Command::Search(a) => a.run(),
            Command::BoxCheck(a) => a.run(limits, inputs),
        }
    }
}
