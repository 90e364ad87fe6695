#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::{artefact_path, Failure};
use config::{CommandKind, Params};
use output::{Report, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "annulab",
    version,
    about = "Rotation numbers, periodic orbits and invariant manifolds of annulus maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Invocation {
    /// JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand)]
enum Command {
    /// Translation number of one orbit
    Rot(Invocation),
    /// Mean translation number against an invariant density
    MeanRot(Invocation),
    /// Rotation interval over a seed set, or along an unstable manifold with --fixed-point
    Interval(Invocation),
    /// Newton search for (p, q) periodic orbits
    Orbit(Invocation),
    /// Count distinct periodic orbits for every rational up to --qmax
    AuditPb(Invocation),
    /// Length-maximising periodic billiard orbit
    BilliardOrbit(Invocation),
    /// Grow stable or unstable manifold branches
    Manifold(Invocation),
    /// Rasterise manifold branches to PGM and SVG
    Raster(Invocation),
    /// Transverse crossings of the unstable and stable manifolds
    Intersect(Invocation),
    /// Invariant-measure check
    MeasureCheck(Invocation),
}

impl Command {
    fn split(self) -> (CommandKind, Invocation) {
        match self {
            Command::Rot(i) => (CommandKind::Rot, i),
            Command::MeanRot(i) => (CommandKind::MeanRot, i),
            Command::Interval(i) => (CommandKind::Interval, i),
            Command::Orbit(i) => (CommandKind::Orbit, i),
            Command::AuditPb(i) => (CommandKind::AuditPb, i),
            Command::BilliardOrbit(i) => (CommandKind::BilliardOrbit, i),
            Command::Manifold(i) => (CommandKind::Manifold, i),
            Command::Raster(i) => (CommandKind::Raster, i),
            Command::Intersect(i) => (CommandKind::Intersect, i),
            Command::MeasureCheck(i) => (CommandKind::MeasureCheck, i),
        }
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn emit(params: &Params, bytes: &[u8], images: &[(&str, Vec<u8>)]) -> std::io::Result<()> {
    match &params.output {
        Some(prefix) => {
            if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(artefact_path(prefix, "json"), bytes)?;
            for (ext, data) in images {
                fs::write(artefact_path(prefix, ext), data)?;
            }
            Ok(())
        }
        None => std::io::stdout().write_all(bytes),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let (kind, inv) = cli.command.split();
    let params = match &inv.config {
        Some(path) => match Params::from_file(path) {
            Ok(file) => file.overlay(&inv.params),
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => inv.params.clone(),
    };
    if let Err(e) = params.validate_for(kind) {
        eprintln!("config error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }

    let result = annulab_core::exec::with_jobs(params.jobs, || commands::run(kind, &params));
    let (report, images, code) = match result {
        Ok(out) => (
            Report {
                schema_version: SCHEMA_VERSION,
                command: kind.name(),
                config_echo: &params,
                results: out.results,
                diagnostics: out.diagnostics,
            },
            out.images,
            ExitCode::SUCCESS,
        ),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {} ({}): {e}", e.name(), e.module());
            (
                Report {
                    schema_version: SCHEMA_VERSION,
                    command: kind.name(),
                    config_echo: &params,
                    results: serde_json::Value::Null,
                    diagnostics: json!({ "error": { "name": e.name(), "module": e.module(), "message": e.to_string() } }),
                },
                Vec::new(),
                ExitCode::from(EXIT_NUMERICAL),
            )
        }
    };
    let bytes = match output::to_bytes(&report) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot serialise report: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    if let Err(e) = emit(&params, &bytes, &images) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    code
}
