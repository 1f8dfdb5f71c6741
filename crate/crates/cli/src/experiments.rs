//! The experiment kinds. Each writes its artifacts and returns the checks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gaprecover::io::{fmt_num, write_signal_csv};
use gaprecover::recovery::STABILITY_SLACK;
use gaprecover::sampling::{band_l2_distance, band_sup_distance, check_first_order, FIRST_ORDER_WARN};
use gaprecover::tomography::{PipelineConfig, DESIGN_CONDITION_LIMIT};
use gaprecover::{
    band_approx_first_term, band_interpolate, band_project, band_spill_ratio, comb_sample, concentration_ratio,
    eps_grid, erase, evolve_diagonal_series, forward_spectrum, invertibility_report, make_demo_signal,
    noise_stability_sweep, operator_norm_sq, random_momentum_state, recover_direct, recover_neumann,
    spectral_copy_recover, state_pipeline, ErasureModel, Error, Grid, Interval, PhaseSpaceWindows, Signal,
    SolverOptions, Spec, SpectralCopyConfig, Window,
};

use crate::config::{ExperimentConfig, Kind, DEFAULT_NOISE};
use crate::error::CliError;
use crate::report::{Check, Outcome};
use crate::svg::{LineChart, Series};

/// Target relative error for a noiseless recovery.
pub const RECOVERY_TOL: f64 = 1e-6;
/// Series and direct solutions must agree to this.
pub const AGREEMENT_TOL: f64 = 1e-8;
pub const PIPELINE_FIDELITY_TOL: f64 = 1e-6;
pub const TOMOGRAPHY_TOL: f64 = 1e-6;
pub const INTERPOLATION_TOL: f64 = 1e-6;

/// Collects the files an experiment writes.
pub struct Artifacts {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> gaprecover::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, seed: u64, files: &mut Artifacts) -> Result<Outcome, CliError> {
    match cfg.experiment {
        Kind::Fig2 => fig2(cfg, files),
        Kind::BoundsAudit => bounds_audit(cfg, files),
        Kind::Recovery => recovery(cfg, files),
        Kind::Stability => stability(cfg, seed, files),
        Kind::Sampling => sampling(cfg, files),
        Kind::QuantumPipeline => quantum_pipeline(cfg, seed, files),
    }
}

fn band(w: f64) -> Result<Window, CliError> {
    Interval::centered(w).map_err(|e| CliError::Config(format!("invalid field `W`: {e}")))
}

fn gap(t: f64) -> Result<Window, CliError> {
    Interval::centered(t).map_err(|e| CliError::Config(format!("invalid field `T_DS`: {e}")))
}

/// The band-limited test signal on `grid`.
fn test_signal(grid: &Grid, band: &Window) -> Result<Signal, CliError> {
    Ok(band_project(&make_demo_signal(grid)?, band)?)
}

/// Column label for a gap width: `1 -> T1`, `0.25 -> T025`.
fn gap_label(t: f64) -> String {
    format!("T{}", format!("{t}").replace('.', ""))
}

/// Copies of `P_W r^` are only exact where `r = s`, so the comb sits at
/// `T_SN/2 + k T_SN`, clear of a gap narrower than `T_SN`.
fn copy_setup(band: Window, t_sn: f64, t_ds: f64, k_max: usize) -> SpectralCopyConfig<f64> {
    let mut cfg = SpectralCopyConfig::new(band, t_sn, t_ds);
    cfg.allow_equal = true;
    cfg.comb_offset = t_sn / 2.0;
    cfg.k_max = k_max;
    cfg
}

/// Check recorded when a module refused: passes only if that was expected.
fn refusal_check(what: &str, expected: bool) -> Check {
    let name = if expected { format!("{what} refuses") } else { format!("{what} accepts the windows") };
    Check::holds(name, expected)
}

fn fig2(cfg: &ExperimentConfig, files: &mut Artifacts) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let w = cfg.w();
    let b = band(w)?;
    let t_sn = cfg.t_sn.unwrap_or(0.25);
    let k_max = cfg.k_max.unwrap_or(2);
    let s = test_signal(&grid, &b)?;
    let s_hat = forward_spectrum(&s);
    let mut out = Outcome::default();

    let mut gaps = cfg.t_ds_list();
    gaps.sort_by(|a, b| b.total_cmp(a));
    gaps.dedup();
    let mut columns: Vec<(String, Spec)> = vec![("s_hat".into(), s_hat.clone())];
    let mut sups = Vec::new();
    for &t in &gaps {
        let r = erase(&s, &ErasureModel::new(gap(t)?, b))?;
        let pwr = forward_spectrum(&band_project(&r, &b)?);
        let sup = band_sup_distance(&pwr, &s_hat, &b)?;
        out.metric(&format!("sup_error_{}", gap_label(t)), sup);
        sups.push(sup);
        if w * t <= FIRST_ORDER_WARN {
            let approx = band_approx_first_term(&r, &b, t)?;
            let first = check_first_order(&approx, &s_hat, &b)?;
            out.check(Check::at_most(format!("first-order error bound at T_DS = {t}"), first.sup_error, first.bound));
        }
        columns.push((format!("pwr_hat_{}", gap_label(t)), pwr));
    }
    for (pair, t) in sups.windows(2).zip(gaps.windows(2)) {
        out.check(Check::below(format!("error shrinks from T_DS = {} to {}", t[0], t[1]), pair[1], pair[0]));
    }

    // one sample narrower so the half-open gap misses the tooth at -T_SN/2
    let narrowed = (t_sn - grid.dt()).max(0.0);
    let r = erase(&s, &ErasureModel::new(gap(narrowed)?, b))?;
    let mut copy_errors = Vec::new();
    let mut recovered = None;
    for k in 0..=k_max {
        let res = spectral_copy_recover(&r, &copy_setup(b, t_sn, narrowed, k))?;
        copy_errors.push(band_l2_distance(&res.spectrum, &s_hat, &b)?);
        out.metric("k_used", res.k_used as f64);
        recovered = Some(res.spectrum);
    }
    for (k, e) in copy_errors.iter().enumerate() {
        out.metric(&format!("copy_l2_error_k{k}"), *e);
    }
    if let (Some(first), Some(last)) = (copy_errors.first(), copy_errors.last()) {
        if k_max > 0 {
            out.check(Check::below(format!("copy sum with k_max = {k_max} beats k_max = 0"), *last, *first));
        }
    }
    columns.push((format!("recovered_k{k_max}"), recovered.expect("k range is non-empty")));

    let bins = grid.frequencies().indices_in(&b);
    let fg = grid.frequencies();
    let mut csv = String::from("w");
    for (name, _) in &columns {
        let _ = write!(csv, ",{name},{name}_im");
    }
    csv.push('\n');
    for i in bins.clone() {
        csv.push_str(&fmt_num(fg.frequency(i)));
        for (_, spec) in &columns {
            let z = spec.values()[i];
            let _ = write!(csv, ",{},{}", fmt_num(z.re), fmt_num(z.im));
        }
        csv.push('\n');
    }
    files.write("fig2.csv", csv.as_bytes())?;
    if cfg.svg {
        let series = columns
            .iter()
            .map(|(name, spec)| Series {
                label: name.clone(),
                points: bins.clone().map(|i| (fg.frequency(i), spec.values()[i].re)).collect(),
            })
            .collect();
        let chart = LineChart { title: format!("band spectra, W = {w}"), x_label: "w".into(), series };
        files.write("fig2.svg", chart.render().as_bytes())?;
    }
    Ok(out)
}

fn bounds_audit(cfg: &ExperimentConfig, files: &mut Artifacts) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let demo = make_demo_signal(&grid)?;
    let mut out = Outcome::default();
    let mut csv = String::from("W,T,WT,lambda0,conc_ratio,spill_ratio,eps_grid,pass\n");
    for &w in &cfg.w_list() {
        let b = band(w)?;
        let s = band_project(&demo, &b)?;
        for &t in &cfg.t_ds_list() {
            let window = gap(t)?;
            let wt = w * t;
            let eps = eps_grid(grid.dt(), w, t);
            let label = format!("W = {w}, T = {t}");
            let lambda0 = match operator_norm_sq(&grid, &b, &window) {
                Ok(p) => p.lambda0,
                Err(e) => {
                    out.refusals.push(format!("{label}: {e}"));
                    f64::NAN
                }
            };
            let conc = concentration_ratio(&s, &b, &window)?;
            let spill = band_spill_ratio(&s, &b, &window)?;
            let pass = lambda0 <= (wt + eps).min(1.0) && conc <= lambda0 + 1e-12 && spill >= 1.0 - wt - eps;
            out.check(Check::at_most(format!("lambda0 <= min(1, WT + eps) at {label}"), lambda0, (wt + eps).min(1.0)));
            out.check(Check::at_most(format!("concentration <= lambda0 at {label}"), conc, lambda0 + 1e-12));
            out.check(Check::at_least(format!("spill >= 1 - WT - eps at {label}"), spill, 1.0 - wt - eps));
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                fmt_num(w),
                fmt_num(t),
                fmt_num(wt),
                fmt_num(lambda0),
                fmt_num(conc),
                fmt_num(spill),
                fmt_num(eps),
                pass
            );
        }
    }
    files.write("bounds_audit.csv", csv.as_bytes())?;
    Ok(out)
}

fn recovery(cfg: &ExperimentConfig, files: &mut Artifacts) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let (w, t) = (cfg.w(), cfg.t_ds());
    let (b, window) = (band(w)?, gap(t)?);
    let s = test_signal(&grid, &b)?;
    let r = erase(&s, &ErasureModel::new(window, b))?;
    let opts = SolverOptions { tol: cfg.tol_or_default(), k_max: cfg.k_max };
    let mut out = Outcome::default();

    let inv = invertibility_report(&grid, &b, &window)?;
    out.metric("lambda0", inv.lambda0);
    out.metric("WT", inv.wt);
    let rep = recover_neumann(&r, &b, &window, &opts)?;
    files.write_with("recovery.csv", |buf| rep.write_csv(buf))?;
    if let Some(reason) = &rep.refusal {
        out.refusals.push(reason.clone());
    }
    if cfg.expect_refusal {
        out.check(Check::holds("solver refuses", rep.is_refused() && rep.recovered.is_none()));
        return Ok(out);
    }
    let Some(x) = rep.recovered.as_ref() else {
        out.check(refusal_check("solver", false).note(rep.refusal.clone().unwrap_or_default()));
        return Ok(out);
    };
    files.write_with("recovered.csv", |buf| write_signal_csv(x, buf))?;
    let err = x.relative_error(&s)?;
    out.metric("iterations", rep.iterations as f64);
    out.metric("contraction_estimate", rep.contraction_estimate);
    out.check(Check::holds("series converged", rep.converged));
    out.check(Check::at_most("relative error", err, RECOVERY_TOL.max(cfg.tol_or_default())));
    out.check(Check::at_most("contraction estimate", rep.contraction_estimate, inv.wt.sqrt() + 0.02));
    let direct = recover_direct(&r, &b, &window)?;
    match direct.recovered {
        Some(d) => {
            let agree = x.sub(&d)?.l2_norm() / s.l2_norm();
            out.metric("direct_condition_number", direct.condition_number.unwrap_or(f64::NAN));
            out.check(Check::at_most("series agrees with direct solve", agree, AGREEMENT_TOL));
        }
        None => out.refusals.push(format!("direct: {}", direct.refusal.unwrap_or_default())),
    }
    Ok(out)
}

fn stability(cfg: &ExperimentConfig, seed: u64, files: &mut Artifacts) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let (b, window) = (band(cfg.w())?, gap(cfg.t_ds())?);
    let s = test_signal(&grid, &b)?;
    let levels = cfg.noise_levels.clone().unwrap_or_else(|| DEFAULT_NOISE.to_vec());
    let opts = SolverOptions { tol: cfg.tol_or_default(), k_max: cfg.k_max };
    let mut out = Outcome::default();
    let rep = match noise_stability_sweep(&s, &b, &window, &levels, seed, &opts) {
        Ok(rep) => rep,
        Err(Error::Refused(reason)) => {
            out.refusals.push(reason);
            out.check(refusal_check("solver", cfg.expect_refusal));
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    files.write_with("stability.csv", |buf| rep.write_csv(buf))?;
    out.metric("lambda0", rep.lambda0);
    out.metric("amplification_bound", STABILITY_SLACK / (1.0 - rep.lambda0.sqrt()));
    for row in &rep.rows {
        if let Some(a) = row.amplification {
            out.check(Check::at_most(format!("amplification at sigma = {}", row.sigma), a, row.bound));
        }
    }
    if cfg.expect_refusal {
        out.check(Check::holds("solver refuses", false));
    }
    Ok(out)
}

fn sampling(cfg: &ExperimentConfig, files: &mut Artifacts) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let (w, t_ds) = (cfg.w(), cfg.t_ds());
    let t_sn = cfg.t_sn.unwrap_or(1.0 / w);
    let k_max = cfg.k_max.unwrap_or(gaprecover::sampling::DEFAULT_K_MAX);
    let b = band(w)?;
    let s = test_signal(&grid, &b)?;
    let s_hat = forward_spectrum(&s);
    let mut out = Outcome::default();

    let comb = comb_sample(&s, t_sn)?;
    let back = band_interpolate(&comb, &b)?;
    let interior = back.sup_distance_on(&s, 0.0, grid.span() / 4.0)?;
    out.check(Check::at_most(format!("band interpolation from period {t_sn}"), interior, INTERPOLATION_TOL));

    let r = erase(&s, &ErasureModel::new(gap(t_ds)?, b))?;
    let mut csv = String::from("k,l2_error,tail_norm,clipped\n");
    let mut errors = Vec::new();
    for k in 0..=k_max {
        let res = spectral_copy_recover(&r, &copy_setup(b, t_sn, t_ds, k))?;
        let e = band_l2_distance(&res.spectrum, &s_hat, &b)?;
        let _ = writeln!(csv, "{},{},{},{}", res.k_used, fmt_num(e), fmt_num(res.tail_norm), res.clipped);
        if k == k_max {
            out.metric("k_used", res.k_used as f64);
        }
        errors.push(e);
    }
    files.write("sampling.csv", csv.as_bytes())?;
    for (k, pair) in errors.windows(2).enumerate() {
        out.check(Check::at_most(format!("copy error does not grow from k = {k} to {}", k + 1), pair[1], pair[0]));
    }
    out.metric("copy_l2_error_final", *errors.last().expect("k range is non-empty"));
    Ok(out)
}

fn quantum_pipeline(cfg: &ExperimentConfig, seed: u64, files: &mut Artifacts) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let x = cfg.x.unwrap_or(0.25);
    let p = cfg.p.unwrap_or(2.0);
    let windows = PhaseSpaceWindows::centered(x, p)?;
    let x_points = cfg.x_points.clone().unwrap_or_else(|| (0..16).map(|i| i as f64 / 4.0).collect());
    let t_points = cfg.t_points.clone().unwrap_or_else(|| (0..16).map(|n| n as f64 * 7.3).collect());
    let pipeline = PipelineConfig { windows, x_points, t_points, mass: cfg.mass_or_default(), tol: cfg.tol_or_default() };
    let mut out = Outcome::default();
    out.metric("XP", x * p);
    let psi = random_momentum_state(grid, &windows.p_band, seed)?;
    let res = match state_pipeline(&psi, &pipeline) {
        Ok(res) => res,
        Err(Error::Refused(reason)) => {
            out.refusals.push(reason);
            out.check(refusal_check("pipeline", cfg.expect_refusal));
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    let samples = evolve_diagonal_series(&res.truth, &pipeline.x_points, &pipeline.t_points);
    files.write_with("evolution.csv", |buf| samples.write_csv(buf))?;
    files.write_with("density.csv", |buf| res.tomography.density.write_csv(buf))?;
    let tomo = &res.tomography;
    let summary = serde_json::json!({
        "condition_number": tomo.condition_number,
        "residual": tomo.residual,
        "rank_gap": tomo.rank_gap,
        "fidelity": res.fidelity,
    });
    files.write("tomography.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    let density_error = tomo.density.max_abs_diff(&res.truth)?;
    out.metric("extraction_fidelity", res.extraction_fidelity);
    out.metric("recovery_iterations", res.recovery_iterations as f64);
    out.metric("density_max_abs_error", density_error);
    out.check(Check::at_most("design condition number", tomo.condition_number, DESIGN_CONDITION_LIMIT));
    out.check(Check::at_most("density matrix error", density_error, TOMOGRAPHY_TOL));
    out.check(Check::at_least("state fidelity", res.fidelity, 1.0 - PIPELINE_FIDELITY_TOL));
    if cfg.expect_refusal {
        out.check(Check::holds("pipeline refuses", false));
    }
    Ok(out)
}
