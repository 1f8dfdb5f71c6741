use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaprecover_cli::{config, resolve_out, run_batch, CliError, ExperimentConfig, RunReport};

/// Recovery of band-limited signals and states from gapped data.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment (or batch) described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `out`, then $GAPRECOVER_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Spectra for W = 2 and three gap widths, plus a copy-sum recovery.
    Fig2 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator-norm, concentration and spill bounds over a (W, T) sweep.
    Audit {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn summarize(report: &RunReport, dir: &Path) {
    let status = if report.passed { "PASS" } else { "FAIL" };
    println!("{} {status} ({} checks) -> {}", report.experiment, report.checks.len(), dir.display());
    for c in report.failed_checks() {
        println!("  failed: {} ({} {} {})", c.name, c.measured, c.relation, c.threshold);
    }
    for r in &report.refusals {
        println!("  refused: {r}");
    }
}

fn execute(cfgs: Vec<ExperimentConfig>, out: Option<PathBuf>, seed: Option<u64>) -> Result<bool, CliError> {
    let dir = resolve_out(out.as_deref(), &cfgs[0]);
    let mut all = true;
    for (i, result) in run_batch(&cfgs, &dir, seed).into_iter().enumerate() {
        let report = result?;
        let sub = if cfgs.len() == 1 { dir.clone() } else { dir.join(format!("{i:02}-{}", report.experiment)) };
        summarize(&report, &sub);
        all &= report.passed;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed } => config::load(&config).and_then(|c| execute(c, out, seed)),
        Command::Fig2 { out } => execute(vec![ExperimentConfig::fig2()], out, None),
        Command::Audit { out } => execute(vec![ExperimentConfig::audit()], out, None),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
