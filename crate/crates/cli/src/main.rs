use std::path::PathBuf;
use std::process::ExitCode;

use boxcast_cli::commands;
use boxcast_cli::config::{FileConfig, RunConfig};
use boxcast_cli::exit::Failure;
use clap::{Args, Parser, Subcommand};

/// Forecast opening-weekend box office from screens and article pageviews.
#[derive(Parser)]
#[command(name = "boxcast", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Flat TOML file of run settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Market code: US, UK, AU, DE or JA.
    #[arg(long, global = true)]
    market: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// First day offset of the pageview window.
    #[arg(long, global = true, allow_hyphen_values = true)]
    window_start: Option<i32>,
    /// Day offset of the leave-one-out error report.
    #[arg(long, global = true, allow_hyphen_values = true)]
    loocv_day: Option<i32>,
    /// Fit without a constant term.
    #[arg(long, global = true)]
    no_intercept: bool,
    /// Directory with catalog.csv, film_list.json, search.json, overrides.json and pageviews/.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Bind catalog titles to articles and write manifest.json.
    Align,
    /// Download pageviews for the manifest into the cache.
    Fetch,
    /// Fit per-day models and write CSV, SVG and JSON reports.
    Evaluate,
    /// Evaluate without the k highest-grossing films.
    AblateTop {
        k: usize,
    },
    /// Align, fetch and evaluate.
    Pipeline,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = cli.global;
    let file = g.config.as_deref().map(FileConfig::read).transpose()?;
    let flags = FileConfig {
        market: g.market,
        out_dir: g.out,
        window_start: g.window_start,
        loocv_day: g.loocv_day,
        with_intercept: g.no_intercept.then_some(false),
        ..Default::default()
    };
    let config = RunConfig::resolve(flags, file, g.fixtures.as_deref())?;
    match cli.command {
        Command::Align => commands::align(&config).map(drop),
        Command::Fetch => commands::fetch(&config).map(drop),
        Command::Evaluate => commands::evaluate(&config).map(drop),
        Command::AblateTop { k } => commands::ablate_top(&config, k).map(drop),
        Command::Pipeline => commands::pipeline(&config).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code() as u8)
        }
    }
}
