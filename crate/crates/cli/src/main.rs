mod commands;
mod config;

use clap::Parser;
use config::{Cli, RunConfig};
use nearcircle::Error;
use serde::Serialize;
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::NonStarShaped { .. } => "non-star-shaped",
        Error::NonConvex { .. } => "non-convex",
        Error::SolverFailure { .. } => "solver-failure",
        Error::BracketFailure { .. } => "bracket-failure",
        Error::WindowViolation { .. } => "window-violation",
        Error::NotNearlyCircular { .. } => "not-nearly-circular",
        Error::NoConvergence { .. } => "no-convergence",
        Error::UnsupportedProfile => "unsupported-profile",
        Error::PartitionAmbiguous { .. } => "partition-ambiguous",
        Error::ResolutionCap { .. } => "resolution-cap",
        Error::NoisyFit { .. } => "noisy-fit",
        Error::InvalidArgument(_) => "invalid-argument",
        Error::Config { .. } => "config",
    }
}

fn report(error: &str, message: String, exit_code: u8) -> ExitCode {
    let r = ErrorReport { error, message, exit_code };
    eprintln!("{}", serde_json::to_string(&r).expect("plain struct serializes"));
    ExitCode::from(exit_code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report("usage", e.to_string().trim().to_string(), EXIT_VALIDATION),
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => return report(kind(&e), e.to_string(), EXIT_VALIDATION),
    };
    if cfg.settings.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.settings.workers).build_global() {
            return report("invalid-argument", format!("cannot start worker pool: {e}"), EXIT_VALIDATION);
        }
    }
    match commands::run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => report("invariant-failure", "one or more invariant checks failed".into(), EXIT_INVARIANT),
        Err(e) => {
            let code = if e.is_solver_failure() { EXIT_SOLVER } else { EXIT_VALIDATION };
            report(kind(&e), e.to_string(), code)
        }
    }
}
