//! Erasure channel and deterministic recovery of a band-limited signal whose
//! samples inside a short window were lost.
//!
//! Two equivalent series are provided:
//!
//! * time form: `s = sum_k (P_T P_W)^k r`
//! * band form: `s = sum_k (P_W P_T)^k P_W r`, every partial sum band-limited
//!
//! plus a dense solve of the band form in the in-band coefficient basis.

use std::io::Write;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::{in_band_gram, solve_checked, CVector};
use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::io::fmt_num;
use crate::projections::{power_iteration, ProjectorPair, POWER_MAX_ITER, POWER_TOL};
use crate::scalar::{from_c64, to_c64, Real};
use crate::signal::{norm_sq, SampledSignal};

/// Relative out-of-band norm accepted for a "band-limited" input.
pub const BANDLIMIT_TOL: f64 = 1e-10;
/// Guard on the top eigenvalue: `lambda0 <= 1 - 1e-6`.
pub const LAMBDA_GUARD: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-10;
/// Condition number above which the direct solve refuses.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Largest in-band dimension accepted by [`recover_direct`].
pub const MAX_DIRECT_DIM: usize = 4096;

/// Lost window, optional additive noise, and the band the receiver assumes.
#[derive(Debug, Clone)]
pub struct ErasureModel<T: Real> {
    pub window: Interval<T>,
    pub source_band: Interval<T>,
    noise: Option<SampledSignal<T>>,
}

impl<T: Real> ErasureModel<T> {
    pub fn new(window: Interval<T>, source_band: Interval<T>) -> Self {
        Self { window, source_band, noise: None }
    }

    /// Attaches noise; it must vanish on the window.
    pub fn with_noise(mut self, noise: SampledSignal<T>) -> Result<Self> {
        let inside = noise.grid().indices_in(&self.window);
        if noise.values()[inside].iter().any(|v| v.norm() != T::zero()) {
            return Err(Error::Degenerate("noise must vanish on the erased window".into()));
        }
        self.noise = Some(noise);
        Ok(self)
    }

    pub fn noise(&self) -> Option<&SampledSignal<T>> {
        self.noise.as_ref()
    }
}

/// Relative norm of the out-of-band part, `||(1 - P_W) s|| / ||s||`.
pub fn out_of_band_fraction<T: Real>(s: &SampledSignal<T>, band: &Interval<T>) -> Result<T> {
    let total = s.l2_norm();
    if total == T::zero() {
        return Ok(T::zero());
    }
    let pair = ProjectorPair::new(*s.grid(), *band, Interval::new(T::zero(), T::zero())?)?;
    let spec = pair.fourier().forward_values(s.values());
    let inside = norm_sq(&spec[pair.band_bins()]);
    let outside = (norm_sq(&spec) - inside).max(T::zero());
    Ok((outside * s.grid().frequencies().dw()).sqrt() / total)
}

/// `r = (1 - P_T) s_W + n`.
pub fn erase<T: Real>(s_band: &SampledSignal<T>, model: &ErasureModel<T>) -> Result<SampledSignal<T>> {
    let residual = out_of_band_fraction(s_band, &model.source_band)?;
    if residual > T::of(BANDLIMIT_TOL) {
        return Err(Error::NotBandlimited { residual: residual.as_f64(), tolerance: BANDLIMIT_TOL });
    }
    let pair = ProjectorPair::new(*s_band.grid(), model.source_band, model.window)?;
    let r = pair.complement(s_band)?;
    match &model.noise {
        Some(n) => r.add(n),
        None => Ok(r),
    }
}

/// Whether `1 - P_W P_T` can be inverted by the series.
#[derive(Debug, Clone, PartialEq)]
pub struct Invertibility<T> {
    pub lambda0: T,
    /// Nominal `W * T` from the interval widths.
    pub wt: T,
    pub wt_below_one: bool,
    pub lambda_guard_ok: bool,
    pub invertible: bool,
}

impl<T: Real> Invertibility<T> {
    pub fn reason(&self) -> Option<String> {
        if self.invertible {
            return None;
        }
        let mut parts = Vec::new();
        if !self.wt_below_one {
            parts.push(format!("WT = {} >= 1", self.wt));
        }
        if !self.lambda_guard_ok {
            parts.push(format!("lambda0 = {} > 1 - {LAMBDA_GUARD:e}", self.lambda0));
        }
        Some(format!("1 - P_W P_T is not invertible: {}", parts.join(", ")))
    }
}

pub fn invertibility_report<T: Real>(
    grid: &crate::grid::TimeGrid<T>,
    band: &Interval<T>,
    window: &Interval<T>,
) -> Result<Invertibility<T>> {
    let pair = ProjectorPair::new(*grid, *band, *window)?;
    invertibility_of(&pair)
}

fn invertibility_of<T: Real>(pair: &ProjectorPair<T>) -> Result<Invertibility<T>> {
    let lambda0 = power_iteration(pair, T::of(POWER_TOL), POWER_MAX_ITER)?.lambda0;
    let wt = pair.band().width() * pair.window().width();
    let wt_below_one = wt < T::one();
    let lambda_guard_ok = lambda0 <= T::one() - T::of(LAMBDA_GUARD);
    Ok(Invertibility { lambda0, wt, wt_below_one, lambda_guard_ok, invertible: wt_below_one && lambda_guard_ok })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Stop when the relative update falls below this.
    pub tol: T,
    /// Iteration cap; `None` picks `ceil(log tol / log sqrt(WT)) + 50`.
    pub k_max: Option<usize>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { tol: T::of(DEFAULT_TOL), k_max: None }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, k_max: None }
    }

    pub fn iteration_cap(&self, wt: T) -> usize {
        if let Some(k) = self.k_max {
            return k;
        }
        let rate = wt.sqrt();
        if !(rate > T::zero()) || rate >= T::one() {
            return 50;
        }
        let k = (self.tol.ln() / rate.ln()).ceil().to_usize().unwrap_or(0);
        k + 50
    }
}

/// Result of one recovery attempt.
#[derive(Debug, Clone)]
pub struct RecoveryReport<T> {
    /// `None` when the solver refused.
    pub recovered: Option<SampledSignal<T>>,
    pub iterations: usize,
    /// Relative update norm per iteration.
    pub residual_history: Vec<T>,
    /// Largest ratio of successive update norms.
    pub contraction_estimate: T,
    pub converged: bool,
    pub refusal: Option<String>,
    /// Set by the direct solver.
    pub condition_number: Option<f64>,
    pub lambda0: T,
}

impl<T: Real> RecoveryReport<T> {
    fn refused(reason: String, lambda0: T) -> Self {
        Self {
            recovered: None,
            iterations: 0,
            residual_history: Vec::new(),
            contraction_estimate: T::zero(),
            converged: false,
            refusal: Some(reason),
            condition_number: None,
            lambda0,
        }
    }

    pub fn is_refused(&self) -> bool {
        self.refusal.is_some()
    }

    /// Writes `iter,residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "residual"])?;
        for (k, r) in self.residual_history.iter().enumerate() {
            w.write_record([(k + 1).to_string(), fmt_num(r.as_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Iteration<T> {
    history: Vec<T>,
    contraction: T,
    converged: bool,
    iterations: usize,
}

/// Fixed-point loop `x <- base + op(x)` shared by both series.
fn neumann_loop<T: Real>(
    base: &[Complex<T>],
    op: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    tol: T,
    cap: usize,
    mut observe: impl FnMut(usize, &[Complex<T>]),
) -> (Vec<Complex<T>>, Iteration<T>) {
    let mut x = base.to_vec();
    observe(0, &x);
    let mut history: Vec<T> = Vec::new();
    let mut last_update: Option<T> = None;
    let mut contraction = T::zero();
    let mut converged = false;
    let mut iterations = 0;
    if norm_sq(base) == T::zero() {
        return (x, Iteration { history, contraction, converged: true, iterations });
    }
    while iterations < cap {
        let ax = op(&x);
        let next: Vec<Complex<T>> = base.iter().zip(&ax).map(|(b, a)| b + a).collect();
        let update = x.iter().zip(&next).fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr()).sqrt();
        let size = norm_sq(&next).sqrt();
        iterations += 1;
        let rel = if size > T::zero() { update / size } else { T::zero() };
        if let Some(prev) = last_update {
            if update > prev {
                // lost monotone decay: keep the better iterate and stop
                history.push(rel);
                break;
            }
            if prev > T::zero() {
                contraction = contraction.max(update / prev);
            }
        }
        last_update = Some(update);
        x = next;
        history.push(rel);
        observe(iterations, &x);
        if rel < tol || update == T::zero() {
            converged = true;
            break;
        }
    }
    (x, Iteration { history, contraction, converged, iterations })
}

/// `s = r + sum_{k>=1} (P_T P_W)^k r`.
pub fn recover_neumann<T: Real>(
    r: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
    opts: &SolverOptions<T>,
) -> Result<RecoveryReport<T>> {
    let pair = ProjectorPair::new(*r.grid(), *band, *window)?;
    let inv = invertibility_of(&pair)?;
    if let Some(reason) = inv.reason() {
        return Ok(RecoveryReport::refused(reason, inv.lambda0));
    }
    let cap = opts.iteration_cap(inv.wt);
    let (x, it) = neumann_loop(r.values(), |x| pair.gate_after_band(x), opts.tol, cap, |_, _| {});
    Ok(RecoveryReport {
        recovered: Some(SampledSignal::new(*r.grid(), x)?),
        iterations: it.iterations,
        residual_history: it.history,
        contraction_estimate: it.contraction,
        converged: it.converged,
        refusal: None,
        condition_number: None,
        lambda0: inv.lambda0,
    })
}

/// `s = sum_k (P_W P_T)^k P_W r`, iterated on in-band coefficients.
pub fn recover_band_neumann<T: Real>(
    r: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
    opts: &SolverOptions<T>,
) -> Result<RecoveryReport<T>> {
    recover_band_neumann_observed(r, band, window, opts, |_, _| {})
}

/// [`recover_band_neumann`] with a callback receiving every partial sum as a
/// time signal (iteration 0 is `P_W r`).
pub fn recover_band_neumann_observed<T: Real>(
    r: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
    opts: &SolverOptions<T>,
    mut observer: impl FnMut(usize, &SampledSignal<T>),
) -> Result<RecoveryReport<T>> {
    let pair = ProjectorPair::new(*r.grid(), *band, *window)?;
    let inv = invertibility_of(&pair)?;
    if let Some(reason) = inv.reason() {
        return Ok(RecoveryReport::refused(reason, inv.lambda0));
    }
    let base = pair.band_coefficients(r)?;
    let cap = opts.iteration_cap(inv.wt);
    let (coeffs, it) = neumann_loop(&base, |x| pair.concentration_apply(x), opts.tol, cap, |k, x| {
        observer(k, &pair.synthesize(x))
    });
    Ok(RecoveryReport {
        recovered: Some(pair.synthesize(&coeffs)),
        iterations: it.iterations,
        residual_history: it.history,
        contraction_estimate: it.contraction,
        converged: it.converged,
        refusal: None,
        condition_number: None,
        lambda0: inv.lambda0,
    })
}

/// Solves `(I - B) c = (P_W r)_band` densely, `B` the in-band matrix of `P_W P_T P_W`.
pub fn recover_direct<T: Real>(
    r: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
) -> Result<RecoveryReport<T>> {
    let pair = ProjectorPair::new(*r.grid(), *band, *window)?;
    let m = pair.band_bins().len();
    if m > MAX_DIRECT_DIM {
        return Err(Error::OutOfRange(format!("in-band dimension {m} exceeds {MAX_DIRECT_DIM}")));
    }
    let inv = invertibility_of(&pair)?;
    if let Some(reason) = inv.reason() {
        return Ok(RecoveryReport::refused(reason, inv.lambda0));
    }
    let gram = in_band_gram(&pair);
    let system = crate::dense::CMatrix::identity(m, m) - gram;
    let rhs = CVector::from_iterator(
        m,
        pair.band_coefficients(r)?.into_iter().map(to_c64),
    );
    match solve_checked(&system, &rhs, CONDITION_LIMIT) {
        Ok((x, condition)) => {
            let coeffs: Vec<Complex<T>> = x.iter().map(|z| from_c64(*z)).collect();
            Ok(RecoveryReport {
                recovered: Some(pair.synthesize(&coeffs)),
                iterations: 0,
                residual_history: Vec::new(),
                contraction_estimate: T::zero(),
                converged: true,
                refusal: None,
                condition_number: Some(condition),
                lambda0: inv.lambda0,
            })
        }
        Err(Error::IllConditioned { condition, limit }) => {
            let mut report = RecoveryReport::refused(
                format!("condition number {condition:e} exceeds {limit:e}"),
                inv.lambda0,
            );
            report.condition_number = Some(condition);
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow<T> {
    pub sigma: T,
    pub err: T,
    /// `err / sigma`; `None` at zero noise.
    pub amplification: Option<T>,
    pub bound: T,
}

#[derive(Debug, Clone)]
pub struct StabilityReport<T> {
    pub seed: u64,
    pub lambda0: T,
    pub rows: Vec<StabilityRow<T>>,
}

/// Slack on the geometric-series amplification bound.
pub const STABILITY_SLACK: f64 = 1.1;

impl<T: Real> StabilityReport<T> {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(|r| r.amplification.is_none_or(|a| a <= r.bound))
    }

    /// Writes `sigma,err,amplification,bound`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sigma", "err", "amplification", "bound"])?;
        for row in &self.rows {
            w.write_record([
                fmt_num(row.sigma.as_f64()),
                fmt_num(row.err.as_f64()),
                row.amplification.map(|a| fmt_num(a.as_f64())).unwrap_or_default(),
                fmt_num(row.bound.as_f64()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Unit-norm white complex noise supported off the window, from a fixed seed.
pub fn white_noise<T: Real>(
    grid: &crate::grid::TimeGrid<T>,
    window: &Interval<T>,
    seed: u64,
) -> SampledSignal<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = grid.indices_in(window);
    let values: Vec<Complex<T>> = (0..grid.len())
        .map(|m| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            if inside.contains(&m) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::of(re), T::of(im))
            }
        })
        .collect();
    let s = SampledSignal::new(*grid, values).expect("grid-sized");
    let norm = s.l2_norm();
    s.scaled(Complex::new(T::one() / norm, T::zero()))
}

/// Recovers `s_W` from `(1 - P_T) s_W + sigma * n` for each noise level and
/// measures the amplification `||x - s_W|| / sigma`.
pub fn noise_stability_sweep<T: Real>(
    s_band: &SampledSignal<T>,
    band: &Interval<T>,
    window: &Interval<T>,
    noise_levels: &[T],
    seed: u64,
    opts: &SolverOptions<T>,
) -> Result<StabilityReport<T>> {
    let inv = invertibility_report(s_band.grid(), band, window)?;
    if let Some(reason) = inv.reason() {
        return Err(Error::Refused(reason));
    }
    let bound = T::of(STABILITY_SLACK) / (T::one() - inv.lambda0.sqrt());
    let unit = white_noise(s_band.grid(), window, seed);
    let mut rows = Vec::with_capacity(noise_levels.len());
    for &sigma in noise_levels {
        let model = ErasureModel::new(*window, *band)
            .with_noise(unit.scaled(Complex::new(sigma, T::zero())))?;
        let r = erase(s_band, &model)?;
        let report = recover_neumann(&r, band, window, opts)?;
        let x = report.recovered.ok_or_else(|| Error::Refused("solver refused".into()))?;
        let err = x.sub(s_band)?.l2_norm();
        let amplification = (sigma > T::zero()).then(|| err / sigma);
        rows.push(StabilityRow { sigma, err, amplification, bound });
    }
    Ok(StabilityReport { seed, lambda0: inv.lambda0, rows })
}
