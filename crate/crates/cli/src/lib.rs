//! Config-driven experiment runner for `gaprecover`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, Kind};
pub use error::CliError;
pub use report::{Check, RunReport};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "GAPRECOVER_OUT";
pub const DEFAULT_OUT: &str = "gaprecover-out";

/// `--out` wins, then the config, then the environment, then [`DEFAULT_OUT`].
pub fn resolve_out(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Runs one experiment into `dir` and writes `report.json` next to its files.
pub fn run(cfg: &ExperimentConfig, dir: &Path, seed: Option<u64>) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let seed = seed.unwrap_or_else(|| cfg.seed_or_default());
    let mut echo = cfg.clone();
    echo.seed = Some(seed);
    let mut files = experiments::Artifacts::new(dir)?;
    let outcome = experiments::run_experiment(cfg, seed, &mut files)?;
    let mut report = RunReport {
        experiment: cfg.experiment.name(),
        passed: !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.passed),
        seed,
        config: echo,
        checks: outcome.checks,
        metrics: outcome.metrics,
        refusals: outcome.refusals,
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: files.files.clone(),
    };
    report.artifacts.push("report.json".into());
    files.write("report.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(report)
}

/// Runs a batch. A single config writes straight into `dir`; several each get
/// their own subdirectory and run on separate threads.
pub fn run_batch(cfgs: &[ExperimentConfig], dir: &Path, seed: Option<u64>) -> Vec<Result<RunReport, CliError>> {
    if let [one] = cfgs {
        return vec![run(one, dir, seed)];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let sub = dir.join(format!("{i:02}-{}", cfg.experiment.name()));
                scope.spawn(move || run(cfg, &sub, seed))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    })
}
