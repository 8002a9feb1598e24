use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use willmore_cli::{cmd_check, cmd_run, cmd_subdivide, CliError};

/// Discrete Willmore energy minimization by projected H²-gradient descent.
#[derive(Debug, Parser)]
#[command(name = "willmore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the descent described by a TOML configuration file.
    Run { config: PathBuf },
    /// Print mesh statistics, area, volume and Willmore energy.
    Check { mesh: PathBuf },
    /// Apply Loop subdivision.
    Subdivide {
        mesh: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let report = cmd_run(&config)?;
            print!("{}", report.render());
            println!("outputs written to {}", report.output_dir.display());
        }
        Command::Check { mesh } => print!("{}", cmd_check(&mesh)?),
        Command::Subdivide { mesh, levels, out } => {
            let m = cmd_subdivide(&mesh, levels, &out)?;
            println!("wrote {} ({} vertices, {} faces)", out.display(), m.n_vertices(), m.n_faces());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
