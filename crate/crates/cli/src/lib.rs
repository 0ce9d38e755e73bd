//! Command-line driver for the fracflow solvers.

pub mod check;
pub mod commands;
pub mod config;
pub mod csv;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fracflow", version, about = "Thin-channel porous flow solver and limit checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the thin-channel problem at one epsilon.
    SolveEps {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        dump_fields: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the limit problem.
    SolveLimit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dump_fields: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare thin-channel solutions with the limit over the epsilon list.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refinement study on a manufactured case.
    Mms {
        #[arg(long)]
        case: String,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical inf-sup constants over grid levels.
    Infsup {
        #[arg(long)]
        problem: String,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        /// Largest level also checked with the dense eigensolver.
        #[arg(long, default_value_t = 12)]
        dense_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on a configuration.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SolveEps { .. } => "solve-eps",
            Command::SolveLimit { .. } => "solve-limit",
            Command::Sweep { .. } => "sweep",
            Command::Mms { .. } => "mms",
            Command::Infsup { .. } => "infsup",
            Command::Check { .. } => "check",
        }
    }
}

fn execute(cmd: Command) -> anyhow::Result<bool> {
    use commands::*;
    match cmd {
        Command::SolveEps { config, epsilon, dump_fields, out } => {
            let c = load_config(&config)?;
            solve_eps(&c, epsilon, dump_fields || c.dump_fields, &output_dir(out, Some(&c)))?;
        }
        Command::SolveLimit { config, dump_fields, out } => {
            let c = load_config(&config)?;
            solve_lim(&c, dump_fields || c.dump_fields, &output_dir(out, Some(&c)))?;
        }
        Command::Sweep { config, out } => {
            let c = load_config(&config)?;
            sweep(&c, &output_dir(out, Some(&c)))?;
        }
        Command::Mms { case, levels, out } => mms(&case, &levels, &output_dir(out, None))?,
        Command::Infsup { problem, levels, epsilon, dense_max, out } => {
            infsup(&problem, &levels, epsilon, dense_max, &output_dir(out, None))?
        }
        Command::Check { config, out } => {
            let c = load_config(&config)?;
            return check::check(&c, &output_dir(out, Some(&c)));
        }
    }
    Ok(true)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs the command line `argv` (program name first) and returns the exit status.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", one_line(first.trim_start_matches("error: ")));
            return 2;
        }
    };
    let name = cli.command.name();
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {name}: {}", one_line(&format!("{e:#}")));
            1
        }
    }
}
