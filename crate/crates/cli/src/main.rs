mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use qalr_core::Error as CoreError;

use args::{Cli, Command};
use commands::{Ctx, Partial};

/// 0 success, 1 usage or config, 2 partial data failure, 3 invariant.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Partial>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::InvalidParameter(_)
                | CoreError::InvalidSchedule(_)
                | CoreError::MissingIntegral(_)
                | CoreError::HilbertCapExceeded { .. } => 1,
                CoreError::InvalidBall(_)
                | CoreError::MissingEnergies(_)
                | CoreError::MissingClass(_)
                | CoreError::Format { .. }
                | CoreError::Io(_)
                | CoreError::Json(_)
                | CoreError::Csv(_) => 2,
                CoreError::Invariant(_)
                | CoreError::QuadratureNonConvergence { .. }
                | CoreError::InsufficientExtension { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::StepSizeUnderflow { .. }
                | CoreError::NormDrift { .. } => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = Ctx::new(&cli.common)?;
    match cli.command {
        Command::Enumerate(a) => commands::enumerate(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Bound(a) => commands::bound(&ctx, a),
        Command::Certify(a) => commands::certify(&ctx, a),
        Command::Scan(a) => commands::scan(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
