use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use virflow::config::{Command, Format};
use virflow::{presets, suites, Options};

#[derive(Parser)]
#[command(name = "virflow", version, about = "Euler-Arnold flows on the Virasoro dual and Hill monodromy")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Integrate KdV, Camassa-Holm, Hunter-Saxton or a general (alpha, beta) flow
    Simulate(Flags),
    /// Monodromy, winding and orbit type of a Hill operator
    Classify(Flags),
    /// Compare log tr M_lambda with its large-lambda expansion
    Casimir(Flags),
    /// Run named invariant suites and print a JSON report
    Verify(Flags),
    /// List presets and suites
    List,
}

#[derive(Args)]
struct Flags {
    /// JSON config file, or `-` for stdin
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named config (see `virflow list`)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Directory for output files
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for random corpora and random initial conditions
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Verify suite; repeatable, `all` selects every suite
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
}

impl From<Flags> for Options {
    fn from(f: Flags) -> Self {
        Options {
            config: f.config,
            preset: f.preset,
            output: f.output,
            format: f.format,
            seed: f.seed,
            suites: f.suites,
        }
    }
}

fn list(out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "presets:")?;
    for p in presets::PRESETS {
        writeln!(out, "  {:<18} {:<9} {}", p.name, p.command.name(), p.summary)?;
    }
    writeln!(out, "suites:\n  all")?;
    for name in suites::names() {
        writeln!(out, "  {name}")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, flags) = match cli.command {
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Classify(f) => (Command::Classify, f),
        Sub::Casimir(f) => (Command::Casimir, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::List => {
            return match list(&mut std::io::stdout().lock()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(_) => ExitCode::from(1),
            }
        }
    };
    let mut stdout = std::io::stdout().lock();
    match virflow::run(command, &Options::from(flags), &mut stdout) {
        Ok(outcome) => {
            if outcome == virflow::Outcome::Failed {
                eprintln!("verify: at least one suite failed");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
