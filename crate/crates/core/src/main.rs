use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wild_euler::cli::{run, Command, RunOptions, EXIT_CONFIG};
use wild_euler::config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "wild-euler", version, about = "Compression-wave initial data for 2D isentropic Euler with p = rho^2")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
    /// Scenario file of `key = value` lines; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid doublings for refinement studies.
    #[arg(long, global = true, default_value_t = 0)]
    refine: usize,
    /// Treat refinement targets as checks.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Check the explicit Riemann subsolution.
    VerifyRiemann,
    /// Solve for the interface speeds on the fan and write the solution.
    SolveFan,
    /// Pull back the fan traces to an initial datum and replay it.
    BuildDatum,
    /// Sample the compression wave and its Euler fields on a (t, x2) grid.
    TraceCharacteristics,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG as u8),
            };
        }
    };
    let cmd = match args.cmd {
        Cmd::VerifyRiemann => Command::VerifyRiemann,
        Cmd::SolveFan => Command::SolveFan,
        Cmd::BuildDatum => Command::BuildDatum,
        Cmd::TraceCharacteristics => Command::TraceCharacteristics,
    };
    let config = match &args.config {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let opts = RunOptions { config, out: args.out, refine: args.refine, strict: args.strict };
    match run(cmd, &opts) {
        Ok(outcome) => {
            let failing = outcome.report.failing();
            if failing.is_empty() {
                println!("{}: PASS", cmd.name());
            } else {
                println!("{}: FAIL ({})", cmd.name(), failing.join(", "));
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
