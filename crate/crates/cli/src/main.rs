use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dfs_sim::{report::report, run_scenario, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "dfs-sim", version, about = "DFS cavity-QED simulation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML config.
    Simulate {
        config: PathBuf,
        /// Exit with code 4 if an acceptance check fails.
        #[arg(long)]
        check: bool,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: config `output`, else `out/<scenario>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Summarise CSV artifacts in a directory.
    Report { dir: PathBuf },
}

fn simulate(
    config: PathBuf,
    check: bool,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<(), CliError> {
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = ScenarioConfig::load(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.scenario.as_str()));
    log::info!("scenario {} seed {} -> {}", cfg.scenario.as_str(), cfg.seed, dir.display());
    let checks = run_scenario(&cfg, config.parent(), &dir, false)?;
    for c in &checks {
        println!("{}", c.line());
    }
    if check {
        let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        if !failed.is_empty() {
            return Err(CliError::Check(failed.join(", ")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate { config, check, seed, out, threads } => simulate(config, check, seed, out, threads),
        Command::Report { dir } => report(&dir).map(|lines| lines.iter().for_each(|l| println!("{l}"))),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
