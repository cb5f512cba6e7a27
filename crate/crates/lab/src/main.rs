use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dartlab::compare::cmd_compare;
use dartlab::run::{cmd_run, RunOptions};
use dartlab::scenario::{cmd_scenario, ScenarioOptions};
use dartlab::LabError;

/// Trace lines shown with an audit violation or a failed scenario.
const TRACE_TAIL: usize = 40;

#[derive(Parser, Debug)]
#[command(name = "dartlab", version, about = "CCN-DART vs NDN forwarding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run only this seed instead of the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (run) or where compare writes its .dat files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Check loop freedom and response symmetry while simulating.
    #[arg(long, global = true, value_parser = parse_switch)]
    audit: Option<bool>,

    /// Write the packet trace here.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every (scheme, caching, rate, seed) cell of a config.
    Run { config: PathBuf },
    /// Summarize a directory of run CSVs and write figure data.
    Compare { dir: PathBuf },
    /// Run a scripted walkthrough: fig1-rankloop, fig1-stale or fig2-sharing.
    Scenario { name: String },
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected on or off, got {other:?}")),
    }
}

fn print_tail(trace: &[String]) {
    if trace.is_empty() {
        return;
    }
    let start = trace.len().saturating_sub(TRACE_TAIL);
    eprintln!("last {} trace lines:", trace.len() - start);
    for line in &trace[start..] {
        eprintln!("  {line}");
    }
}

fn execute(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Run { config } => {
            let opts = RunOptions { seed: cli.seed, out: cli.out, audit: cli.audit, trace: cli.trace };
            let summary = cmd_run(&config, &opts)?;
            println!("{} cells written to {}", summary.cells.len(), summary.out_dir.display());
            println!("manifest: {}", summary.manifest.display());
        }
        Command::Compare { dir } => {
            let cmp = cmd_compare(&dir, cli.out.as_deref())?;
            print!("{}", cmp.render());
        }
        Command::Scenario { name } => {
            let opts = ScenarioOptions { audit: cli.audit, trace: cli.trace };
            let rep = cmd_scenario(&name, &opts)?;
            print!("{}", rep.render());
            if !rep.passed() {
                print_tail(&rep.trace);
                return Err(LabError::Assertion(format!("scenario {name} failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let LabError::Audit { trace, .. } = &e {
                print_tail(trace);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
