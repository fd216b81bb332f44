use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use traitscope_cli::commands::{self, Format, Output, RankHeuristic, MAX_DEPTH_VAR};
use traitscope_cli::server;

/// Solve trait-language programs and localize why their goals fail.
#[derive(Parser)]
#[command(name = "traitscope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every goal; list the likeliest root causes of each failure.
    Check { file: PathBuf },
    /// Print one goal's inference tree.
    Tree {
        file: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Rank a goal's failed predicates under one heuristic.
    Rank {
        file: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long, value_enum, default_value = "inertia")]
        heuristic: RankHeuristic,
    },
    /// Measure each method's distance from known root causes.
    Compare {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        ground_truth_map: PathBuf,
        /// Machine-readable report instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Serve the debugger API on loopback, re-solving on file changes.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
    },
}

fn run(cli: Cli) -> Output {
    let config = match commands::solve_config(std::env::var(MAX_DEPTH_VAR).ok().as_deref()) {
        Ok(c) => c,
        Err(out) => return out,
    };
    match cli.command {
        Command::Check { file } => commands::check(&file, &config),
        Command::Tree { file, goal, format } => commands::tree(&file, &goal, format, &config),
        Command::Rank { file, goal, heuristic } => commands::rank(&file, &goal, heuristic, &config),
        Command::Compare {
            files,
            ground_truth_map,
            json,
        } => commands::compare(&files, &ground_truth_map, json, &config),
        Command::Serve { file, port } => match tokio::runtime::Runtime::new() {
            Ok(rt) => rt.block_on(server::serve(&file, port, config)),
            Err(e) => Output {
                code: 1,
                stderr: format!("cannot start runtime: {e}\n"),
                ..Output::default()
            },
        },
    }
}

fn main() -> ExitCode {
    let out = run(Cli::parse());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
