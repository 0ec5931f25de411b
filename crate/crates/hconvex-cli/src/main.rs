use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hconvex_cli::{cmd_bounds, cmd_export, cmd_solve, cmd_verify, ExportFormat};

/// Prescribed shifted mean curvature solver for h-convex hypersurfaces in
/// hyperbolic space.
#[derive(Parser)]
#[command(name = "hconvex", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the prescribed-curvature problem described by a config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-measure the curvatures of a stored solution and write a report.
    Verify {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Print the analytic a priori bounds for a config.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Export a stored solution as a Poincare-ball mesh (obj) or table (csv).
    Export {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        format: ExportFormatArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, clap::ValueEnum)]
enum ExportFormatArg {
    Obj,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, &out),
        Command::Verify { solution, report } => cmd_verify(&solution, &report),
        Command::Bounds { config } => cmd_bounds(&config),
        Command::Export {
            solution,
            format,
            out,
        } => {
            let format = match format {
                ExportFormatArg::Obj => ExportFormat::Obj,
                ExportFormatArg::Csv => ExportFormat::Csv,
            };
            cmd_export(&solution, format, &out)
        }
    };
    ExitCode::from(code as u8)
}
