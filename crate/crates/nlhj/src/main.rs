use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlhj::config::parse_config;
use nlhj::run::{certificates, execute, oracle_table, status_of, Status};

#[derive(Parser)]
#[command(name = "nlhj", version, about = "Monotone schemes for nonlocal Hamilton-Jacobi equations with exterior data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the certificates and run the configured experiment.
    Run {
        config: PathBuf,
        /// Output directory (defaults to the one named in the configuration).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the certificates only.
    Check { config: PathBuf },
    /// Compare the discrete operator with the quadrature oracle (1-D).
    Oracle { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let path = match &cli.command {
        Command::Run { config, .. } | Command::Check { config } | Command::Oracle { config } => config,
    };
    let cfg = match parse_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let status = match cli.command {
        Command::Run { out, .. } => match execute(&cfg, out.as_deref()) {
            Ok(o) => {
                println!("{} {}", o.status.label(), o.verdict);
                o.status
            }
            Err(e) => {
                eprintln!("{e}");
                Status::Fail
            }
        },
        Command::Check { .. } => match certificates(&cfg) {
            Ok(certs) => {
                let mut status = Status::Pass;
                for c in &certs {
                    let mark = if c.pass { "ok" } else { "FAILED" };
                    let role = if c.gating { "gating" } else { "advisory" };
                    println!("{:<6} {:<8} {:<8} {}", c.name, mark, role, c.detail);
                    if c.gating && !c.pass {
                        status = Status::Precondition;
                    }
                }
                status
            }
            Err(e) => {
                eprintln!("{e}");
                status_of(&e)
            }
        },
        Command::Oracle { .. } => match oracle_table(&cfg) {
            Ok(t) => {
                print!("{}", t.to_tsv());
                Status::Pass
            }
            Err(e) => {
                eprintln!("{e}");
                status_of(&e)
            }
        },
    };
    ExitCode::from(status.exit_code() as u8)
}
