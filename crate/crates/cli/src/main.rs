mod commands;
mod config;
mod embed;
mod output;
mod verify;

use clap::{Parser, Subcommand};
use config::{ConfigError, RunConfig};
use output::Bundle;
use std::path::PathBuf;
use std::process::ExitCode;

/// Allen-Cahn minimisers on truncated hyperbolic graphs.
#[derive(Parser)]
#[command(name = "acgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph and write its edges and a planar embedding.
    Generate(Args),
    /// Hyperbolicity estimates, visual metric and horizon.
    Geometry(Args),
    /// Ball growth, doubling and isoperimetric scans.
    Isoperimetry(Args),
    /// Exhaustion by Dirichlet problems and the asymptotic diagnostics.
    Solve(Args),
    /// Run the self-checks; exits 1 if a hard check fails.
    Verify(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory; overrides ACGRAPH_OUTPUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (&'static str, Args) {
        match self {
            Command::Generate(a) => ("generate", a),
            Command::Geometry(a) => ("geometry", a),
            Command::Isoperimetry(a) => ("isoperimetry", a),
            Command::Solve(a) => ("solve", a),
            Command::Verify(a) => ("verify", a),
        }
    }
}

fn is_usage_error(e: &anyhow::Error) -> bool {
    e.downcast_ref::<ConfigError>().is_some() || matches!(e.downcast_ref::<acgraph::Error>(), Some(acgraph::Error::InvalidParameter(_)))
}

fn run(name: &str, args: Args) -> anyhow::Result<bool> {
    let cfg = RunConfig::load(&args.config)?;
    let workers = match std::env::var("ACGRAPH_WORKERS") {
        Ok(w) => w.parse().map_err(|_| anyhow::anyhow!("ACGRAPH_WORKERS must be a number, got {w:?}"))?,
        Err(_) => cfg.workers,
    };
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    let root = args
        .out
        .or_else(|| std::env::var_os("ACGRAPH_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let dir = root.join(name);
    match name {
        "generate" => commands::generate(&cfg, &dir),
        "geometry" => commands::geometry(&cfg, &dir),
        "isoperimetry" => commands::isoperimetry(&cfg, &dir),
        "solve" => commands::solve(&cfg, &dir),
        _ => {
            let checks = verify::run_checks(&cfg)?;
            for c in &checks {
                let mark = if c.passed { "PASS" } else if c.hard { "FAIL" } else { "WARN" };
                println!("{mark} {}::{}: {}", c.module, c.name, c.detail);
            }
            let passed = checks.iter().all(|c| c.passed || !c.hard);
            let mut b = Bundle::create(&dir, &cfg)?;
            b.json("verify.json", &serde_json::json!({ "passed": passed, "checks": &checks }))?;
            b.csv(
                "checks.csv",
                &["module", "name", "hard", "passed", "detail"],
                checks.iter().map(|c| (&c.module, &c.name, c.hard, c.passed, &c.detail)),
            )?;
            b.finish(&cfg, "verify", Some(passed))?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let (name, args) = Cli::parse().command.split();
    match run(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("acgraph {name}: a hard check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("acgraph {name}: {e:#}");
            ExitCode::from(if is_usage_error(&e) { 2 } else { 1 })
        }
    }
}
