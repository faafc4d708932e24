use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use potentia_cli::scenario::Scenario;
use potentia_cli::{exit_code, outcome_code, run, study, with_overrides};

#[derive(Parser)]
#[command(name = "potentia", version, about = "Run potential-theory scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's pipeline and write its report.
    Run {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cells across the bounding box.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Convergence study over several grid resolutions.
    Study {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        levels: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a scenario without running it.
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { file, out, grid } => {
            let s = with_overrides(Scenario::load(&file)?, grid)?;
            let dir = out.unwrap_or_else(|| s.output.dir.clone());
            let r = run(&s, &dir)?;
            println!("{}: {}", s.name(), r.outcome.summary);
            for f in &r.files {
                println!("  wrote {}", f.display());
            }
            Ok(outcome_code(&r))
        }
        Command::Study { file, levels, out } => {
            let s = Scenario::load(&file)?;
            let dir = out.unwrap_or_else(|| s.output.dir.clone());
            let rep = study(&s, &levels, &dir)?;
            println!("h,residual");
            for r in &rep.rows {
                println!("{},{}", r.h, r.residual);
            }
            Ok(0)
        }
        Command::Validate { file } => {
            let s = Scenario::load(&file)?;
            println!("{}: ok ({} pipeline, {} cells)", file.display(), s.pipeline, s.grid.cells);
            Ok(0)
        }
    }
}
