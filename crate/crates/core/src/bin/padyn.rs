use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use padyn::experiment::{
    self, AnalyzeConfig, ConjugateConfig, CounterexampleConfig, ExperimentConfig, Report, ShadowConfig, SuiteConfig,
};

/// Finite-precision p-adic dynamics experiments with JSON reports.
///
/// Exit status: 0 when every asserted invariant holds, 1 when one fails (the
/// report is still written), 2 on a configuration error.
#[derive(Parser, Debug)]
#[command(name = "padyn", version)]
struct Cli {
    /// Run a JSON configuration file instead of a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "PADYN_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve seeded pseudo-orbits and compare with the exhaustive oracle.
    Shadow(ShadowConfig),
    /// Build and verify conjugacies.
    Conjugate(ConjugateConfig),
    /// Lipschitz, scaling, openness and expansivity scans of one map.
    Analyze(AnalyzeConfig),
    /// Non-shadowing witness for the transported even shift.
    Counterexample(CounterexampleConfig),
    /// Runs the whole battery.
    Suite(SuiteConfig),
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    match (&cli.config, &cli.command) {
        (Some(_), Some(_)) => anyhow::bail!("give either --config or a subcommand, not both"),
        (None, None) => anyhow::bail!("missing subcommand (see --help)"),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
        }
        (None, Some(cmd)) => Ok(match cmd {
            Command::Shadow(c) => ExperimentConfig::Shadow(c.clone()),
            Command::Conjugate(c) => ExperimentConfig::Conjugate(c.clone()),
            Command::Analyze(c) => ExperimentConfig::Analyze(c.clone()),
            Command::Counterexample(c) => ExperimentConfig::Counterexample(c.clone()),
            Command::Suite(c) => ExperimentConfig::Suite(c.clone()),
        }),
    }
}

fn emit(report: &Report, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("padyn: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = experiment::configure_workers(cli.workers) {
        eprintln!("padyn: {e}");
        return ExitCode::from(2);
    }
    let report = match experiment::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("padyn: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, cli.out.as_ref()) {
        eprintln!("padyn: {e:#}");
        return ExitCode::from(2);
    }
    let failed = report.failed_invariants();
    if failed.is_empty() {
        eprintln!("padyn: {} passed ({} invariants, {} ms)", report.command, report.summary.len(), report.timing.wall_ms);
        ExitCode::SUCCESS
    } else {
        eprintln!("padyn: {} FAILED: {}", report.command, failed.join(", "));
        ExitCode::from(1)
    }
}
