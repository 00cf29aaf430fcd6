use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ultralab_cli::{run, CliError, Experiment, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "ultralab", version, about = "Run ultralab experiments and manage the mollifier cache")]
struct Cli {
    /// Mollifier table cache.
    #[arg(long, global = true, env = "ULTRALAB_CACHE")]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for report.json and traces.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML config, or a single experiment with flags.
    #[command(args_conflicts_with_subcommands = true)]
    Run {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[command(subcommand)]
        experiment: Option<Experiment>,
    },
    /// Remove cache entries that fail verification.
    CacheGc {
        /// Cache directory; defaults to --cache-dir.
        dir: Option<PathBuf>,
    },
    #[command(flatten)]
    Experiment(Experiment),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::ConfigInvalid(format!("--threads: {e}")))?;
    }
    let cfg = match cli.command {
        Command::CacheGc { dir } => {
            let dir =
                dir.or(cli.cache_dir).ok_or_else(|| CliError::ConfigInvalid("no cache directory given".into()))?;
            let summary = ultralab::cache::cache_gc(&dir)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            return Ok(0);
        }
        Command::Run { config: Some(path), .. } => RunConfig::load(&path)?,
        Command::Run { experiment: Some(e), .. } | Command::Experiment(e) => RunConfig::single(e),
        Command::Run { config: None, experiment: None } => {
            return Err(CliError::ConfigInvalid("run needs --config or an experiment subcommand".into()))
        }
    };
    let out = cli.out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("ultralab-out"));
    let report = run(&cfg, &RunOptions { out: out.clone(), cache_dir: cli.cache_dir })?;
    for e in &report.experiments {
        for a in &e.assertions {
            println!("{} {}[{}] {}: {}", if a.passed { "PASS" } else { "FAIL" }, e.id, e.index, a.name, a.detail);
        }
        if let Some(err) = &e.error {
            println!("FAIL {}[{}] error: {err}", e.id, e.index);
        }
    }
    println!("report: {}", out.join("report.json").display());
    Ok(report.exit_code())
}
