use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracpass_cli::commands::write_json;
use fracpass_cli::{cmd_check, cmd_constants, cmd_residual, cmd_solve, CliError, RunConfig, EXIT_HYPOTHESIS, EXIT_OK};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracpass", version, about = "Two critical points of a forced fractional Hamiltonian system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the geometry constants.
    Constants(Common),
    /// Audit the hypotheses; exit 0 iff the problem is solver-ready.
    Check(Common),
    /// Find both critical points and write profiles and a summary.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write iteration logs.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate energy, gradient and residual of a profile CSV.
    Residual {
        #[command(flatten)]
        common: Common,
        /// Profile with header t,u_1..u_n on the config grid.
        solution: PathBuf,
    },
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn emit(value: &impl Serialize, out: Option<&Path>, file: &str) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        write_json(&dir.join(file), value)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Constants(common) => {
            let cfg = load(&common)?;
            emit(&cmd_constants(&cfg)?, common.out.as_deref(), "constants.json")?;
            Ok(EXIT_OK)
        }
        Command::Check(common) => {
            let cfg = load(&common)?;
            let outcome = cmd_check(&cfg)?;
            emit(&outcome.report, common.out.as_deref(), "check.json")?;
            if outcome.ready {
                Ok(EXIT_OK)
            } else {
                eprintln!("not solver-ready, failed: {}", outcome.failed.join(", "));
                Ok(EXIT_HYPOTHESIS)
            }
        }
        Command::Solve { common, trace } => {
            let cfg = load(&common)?;
            let out = common.out.clone().unwrap_or_else(|| cfg.base_dir.join(&cfg.output.dir));
            let summary = cmd_solve(&cfg, &out, trace || cfg.output.trace)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(EXIT_OK)
        }
        Command::Residual { common, solution } => {
            let cfg = load(&common)?;
            emit(&cmd_residual(&cfg, &solution)?, common.out.as_deref(), "residual.json")?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
