use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sepstab::config::{load_config, Mode};
use sepstab::report::{emit_report, Format};
use sepstab::runner::{dim_cap_from_env, run};
use sepstab::Error;

#[derive(Parser)]
#[command(name = "sepstab", version, about = "Separable stabilizer construction and fidelity certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the projectors and report the identity residuals.
    Construct(RunArgs),
    /// Also check the operator inequality and the exact bound on the noisy state.
    Verify(RunArgs),
    /// Sample the LOCC tests and report a Hoeffding certificate.
    Certify(RunArgs),
    /// Bound a channel's entanglement fidelity from probe-state fidelities.
    ChannelBound(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Machine,
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{line}");
    ExitCode::from(2)
}

fn execute(mode: Mode, args: &RunArgs) -> Result<bool, Error> {
    let cfg = load_config(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let report = run(&cfg, Some(mode), base, dim_cap_from_env()?)?;
    let format = match args.format {
        FormatArg::Human => Format::Human,
        FormatArg::Machine => Format::Machine,
    };
    let text = emit_report(&report, format);
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail("UsageError", first);
        }
    };
    let (mode, args) = match &cli.command {
        Command::Construct(a) => (Mode::Construct, a),
        Command::Verify(a) => (Mode::Verify, a),
        Command::Certify(a) => (Mode::Certify, a),
        Command::ChannelBound(a) => (Mode::ChannelBound, a),
    };
    match execute(mode, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}
