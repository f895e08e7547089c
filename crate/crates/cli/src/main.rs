use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use embedded_fem_cli::config::{keys_help, Document};
use embedded_fem_cli::driver::{run, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "efem", version, about = "Coupled electro-thermal finite element driver", after_help = keys_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis described by an INI configuration file.
    Run {
        config: PathBuf,
        /// `section.key=value` overrides applied after the file is read.
        overrides: Vec<String>,
        /// Write the evaluator graph of every evaluation type as text and DOT.
        #[arg(long)]
        dump_graph: bool,
    },
}

fn execute(config: &Path, overrides: &[String], dump_graph: bool) -> Result<(), RunError> {
    let mut doc = Document::load(config).map_err(|e| RunError::Config(e.to_string()))?;
    for o in overrides {
        doc.apply_override(o)
            .map_err(|e| RunError::Config(e.to_string()))?;
    }
    let cfg = doc
        .to_run_config()
        .map_err(|e| RunError::Config(e.to_string()))?;
    let summary = run(&cfg, &RunOptions { dump_graph })?;
    if let Some(g) = summary.g {
        println!("mode {}: {} dofs, g = {g:.10}", summary.mode, summary.dofs);
    } else {
        println!("mode {}: {} dofs", summary.mode, summary.dofs);
    }
    println!("output written to {}", cfg.output.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Command::Run {
        config,
        overrides,
        dump_graph,
    } = cli.command;
    match execute(&config, &overrides, dump_graph) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
