mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypers::config::RunConfig;
use hypers::error::ErrorClass;
use hypers::{Error, Result};

use commands::Layout;

/// Hypergraph ensemble recommender.
#[derive(Debug, Parser)]
#[command(name = "hypers", version)]
struct Cli {
    /// Run configuration (TOML, or JSON with a `.json` extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the list length.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print the effective configuration (defaults filled in) and exit.
    #[arg(long)]
    dump_config: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the dataset, draw the split, write the manifest and stats.
    Prepare,
    /// Fit the built-in models and write their rankings.
    Train,
    /// Build the hypergraphs and write the ensemble rankings.
    Rank,
    /// Score every rankings file found in the output directory.
    Evaluate,
    /// All of the above.
    Run,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => read_config(path)?,
        None if cli.dump_config => RunConfig::new("interactions.csv"),
        None => return Err(Error::Config("--config is required".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(k) = cli.k {
        cfg.k = k;
    }
    if let Some(out) = &cli.output {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    if cfg.output.is_relative() {
        cfg.output = base.join(&cfg.output);
    }
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let Some(command) = &cli.command else {
        return Err(Error::Config("no subcommand given (see --help)".into()));
    };
    cfg.validate()?;
    let out = Layout::new(&cfg.output);
    match command {
        Command::Prepare => {
            commands::cmd_prepare(cfg, &out)?;
        }
        Command::Train => {
            let prepared = commands::load_prepared(cfg, &out)?;
            commands::cmd_train(cfg, &out, &prepared)?;
        }
        Command::Rank => {
            let prepared = commands::load_prepared(cfg, &out)?;
            commands::cmd_rank(cfg, &out, &prepared)?;
        }
        Command::Evaluate => {
            let prepared = commands::load_prepared(cfg, &out)?;
            let report = commands::cmd_evaluate(cfg, &out, &prepared)?;
            print!("{}", report.to_table());
        }
        Command::Run => {
            let prepared = commands::cmd_prepare(cfg, &out)?;
            commands::cmd_train(cfg, &out, &prepared)?;
            commands::cmd_rank(cfg, &out, &prepared)?;
            let report = commands::cmd_evaluate(cfg, &out, &prepared)?;
            print!("{}", report.to_table());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numeric => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let result = load_config(&cli).and_then(|cfg| {
        if cli.dump_config {
            let text = toml::to_string_pretty(&cfg).map_err(|e| Error::Config(format!("cannot render config: {e}")))?;
            print!("{text}");
            return Ok(());
        }
        execute(&cli, &cfg)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // every variant already folds its source into the message
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
