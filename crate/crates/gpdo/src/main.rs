use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gpdo::commands::{self, Command};
use gpdo::config::{ConfigError, StructureSpec};
use serde_json::json;

/// Numerical pseudo-differential calculus on graded groups.
#[derive(Debug, Parser)]
#[command(name = "gpdo", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for results, tables and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    refine: Option<u8>,
    /// Structure name: heisenberg1 or abelian:n.
    #[arg(long)]
    group: Option<String>,
    /// Symbol spec: a JSON file or inline JSON.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Registered test function name.
    #[arg(long)]
    function: Option<String>,
    /// Input function file (.csv or binary).
    #[arg(long)]
    input: Option<PathBuf>,
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    if let Some(c) = err.downcast_ref::<ConfigError>() {
        return json!({"error": {"kind": "config", "message": c.to_string(), "fields": c.errors}});
    }
    let kind = match err.downcast_ref::<gpdo_core::Error>() {
        Some(gpdo_core::Error::Hypothesis(_)) => "hypothesis",
        Some(gpdo_core::Error::Domain(_)) => "domain",
        Some(gpdo_core::Error::Dimension { .. }) | Some(gpdo_core::Error::Index { .. }) => "shape",
        Some(gpdo_core::Error::Structure(_)) => "structure",
        Some(gpdo_core::Error::Backend(_)) => "backend",
        Some(gpdo_core::Error::Unsupported(_)) => "unsupported",
        None => "runtime",
    };
    let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
    json!({"error": {"kind": kind, "message": chain.join(": ")}})
}

fn run(cli: &Cli) -> anyhow::Result<serde_json::Value> {
    let mut cfg = commands::load_config(cli.config.as_ref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(r) = cli.refine {
        cfg.frequency.refine = r;
    }
    if let Some(g) = &cli.group {
        cfg.structure = StructureSpec::Named(g.clone());
    }
    if let Some(s) = &cli.symbol {
        cfg.symbol = Some(commands::load_symbol(s)?);
    }
    if let Some(t) = cli.trials {
        cfg.params.trials = Some(t);
    }
    if let Some(f) = &cli.function {
        cfg.function = Some(f.clone());
    }
    if let Some(i) = &cli.input {
        cfg.params.input = Some(i.clone());
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    let threads = match cfg.threads {
        Some(0) => anyhow::bail!(ConfigError {
            errors: vec![gpdo::config::FieldError {
                field: "threads".into(),
                message: "must be at least 1".into(),
            }]
        }),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    let out_dir = cfg.out.clone();
    let out = commands::run(cli.command, &cfg, out_dir.as_deref())?;
    Ok(out.summary)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GPDO_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            println!("{}", json!({"error": {"kind": "usage", "message": msg.trim()}}));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable summary"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            let body = error_json(&err);
            if let Some(dir) = &cli.out {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = std::fs::write(dir.join("error.json"), body.to_string() + "\n");
                }
            }
            log::error!("{err:#}");
            println!("{body}");
            ExitCode::from(if err.downcast_ref::<ConfigError>().is_some() { 2 } else { 1 })
        }
    }
}
