use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use errdens_core::cli_io::{parse_overrides, run, Mode, RunConfig};
use errdens_core::Error;

/// Kernel estimation of regression error densities and Monte Carlo experiments.
///
/// Modes: estimate, rate, gap, normality, supnorm, contrast, simulate.
/// Any configuration key can be overridden with `--key value`.
#[derive(Parser, Debug)]
#[command(name = "errdens", version)]
struct Args {
    mode: String,

    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// `--key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn execute(args: &Args) -> Result<(), Error> {
    let mode: Mode = args.mode.parse()?;
    let mut overrides = parse_overrides(&args.overrides)?;
    // `--config` may also appear among the trailing overrides
    let mut config = args.config.clone();
    if let Some(i) = overrides.iter().rposition(|(k, _)| k == "config") {
        config = Some(PathBuf::from(overrides.remove(i).1));
    }
    overrides.retain(|(k, _)| k != "config");
    let cfg = RunConfig::load(mode, config.as_deref(), &overrides)?;
    let out = run(&cfg)?;
    println!("wrote {}", out.csv.display());
    if let Some(side) = out.sidecar {
        println!("wrote {}", side.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: code={} msg={msg}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
