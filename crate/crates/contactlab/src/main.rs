use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use contactlab::config::{CommandKind, ConfigError, ExperimentConfig};
use contactlab::run::{run_experiment, RunError, EXIT_IO, EXIT_OK, EXIT_VALIDATION};

/// Runs one contactlab experiment and writes its outputs to a directory.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid config, 3 numerical failure
/// (a partial report is still written).
#[derive(Debug, Parser)]
#[command(name = "contactlab", version)]
struct Cli {
    /// twobody, resonance, contact-spectrum, critical, gp-groundstate, gp-evolve,
    /// sweep, bs-kernel or cross-term
    command: String,
    /// TOML or JSON config; without it the command runs on its defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overrides `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`; TOML integers cap it at 2^63 - 1
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    seed: Option<u64>,
    /// Print the fully defaulted config as TOML and exit
    #[arg(long)]
    print_config: bool,
}

fn load(cli: &Cli, kind: CommandKind) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::from_toml_str(&format!("command = \"{}\"", kind.name()))?,
    };
    if cfg.command() != kind {
        return Err(ConfigError::Invalid {
            command: kind.name(),
            message: format!("config is for `{}`", cfg.command().name()),
        });
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CONTACTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("CONTACTLAB_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("CONTACTLAB_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(kind) = CommandKind::parse(&cli.command) else {
        let names: Vec<_> = CommandKind::ALL.iter().map(|c| c.name()).collect();
        eprintln!("error: unknown command `{}` (one of: {})", cli.command, names.join(", "));
        return ExitCode::from(EXIT_VALIDATION as u8);
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_VALIDATION as u8);
    }
    let cfg = match load(&cli, kind) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, ConfigError::Read { .. }) { EXIT_IO } else { EXIT_VALIDATION };
            return ExitCode::from(code as u8);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_toml_string());
        return ExitCode::from(EXIT_OK as u8);
    }
    match run_experiment(&cfg) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", cfg.output_dir.join("report.json").display());
            ExitCode::from(EXIT_OK as u8)
        }
        Err(e) => {
            if let RunError::Numerical { report, .. } = &e {
                for w in &report.warnings {
                    eprintln!("warning: {w}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
