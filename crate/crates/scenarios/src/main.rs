use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use udw_scenarios::{run, ConfigError, RunError, ScenarioConfig, ScenarioId};

#[derive(Parser)]
#[command(name = "udw", version, about = "Smeared detector kernels and tomography scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its tables.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base seed, overriding `seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Add momentum-quadrature columns to curve scenarios.
        #[arg(long)]
        enable_quadrature_columns: bool,
        /// Worker threads; output does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List the available scenarios.
    ListScenarios,
}

fn load(path: &Path) -> Result<ScenarioConfig, RunError> {
    Ok(ScenarioConfig::load(path)?)
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::ListScenarios => {
            for id in ScenarioId::ALL {
                println!("{:<24}{}", id.as_str(), id.description());
            }
        }
        Command::Validate { config } => {
            let resolved = load(&config)?.resolve()?;
            println!("{}: ok ({})", config.display(), resolved.id);
        }
        Command::Run { config, out, seed, enable_quadrature_columns, threads } => {
            let mut cfg = load(&config)?;
            if out.is_some() {
                cfg.output_dir = out;
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            if enable_quadrature_columns {
                cfg.enable_quadrature_columns = Some(true);
            }
            let resolved = cfg.resolve()?;
            if let Some(n) = threads {
                if n == 0 {
                    return Err(ConfigError::new("threads", "must be at least 1").into());
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| RunError::Config(ConfigError::new("threads", e.to_string())))?;
            }
            let report = run(&resolved)?;
            println!("{} -> {}", report.scenario_id, resolved.output_dir.display());
            for f in &report.files {
                println!("  {f}");
            }
            for (k, v) in &report.summary {
                println!("  {k} = {v}");
            }
            if report.point_errors > 0 {
                eprintln!("warning: {} rows carry per-point errors", report.point_errors);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
