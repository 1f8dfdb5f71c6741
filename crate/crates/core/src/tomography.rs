//! Free-evolution tomography: a momentum-limited density matrix is evolved
//! under `H = p^2 / 2m`, read only on the coordinate diagonal, and rebuilt
//! from the time series of those readings.
//!
//! Dense work is in `f64`. With `<x|p> = e^{2 pi i p x} / sqrt(L)` on a box of
//! length `L`,
//!
//! `rho(x, t) = (1/L) sum_jk e^{2 pi i (p_j - p_k) x} e^{-i (w_j - w_k) t} rho_jk`.
//!
//! Every population enters only through the trace, so the diagonal is not
//! determined by the readings. It is completed from the off-diagonals under
//! the rank-one assumption `|rho_jk|^2 = rho_jj rho_kk`.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::dense::{condition_number_real, hermitian_eigen, hermitian_eigenvalues, least_squares, CMatrix};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::io::fmt_num;
use crate::quantum::{recover_state, PhaseSpaceWindows, WaveFunction};
use crate::scalar::{from_c64, to_c64, Real};
use crate::signal::forward_spectrum;

/// Largest accepted condition number of the tomography design.
pub const DESIGN_CONDITION_LIMIT: f64 = 1e10;
/// Second eigenvalue allowed by [`rank1_extract`].
pub const RANK1_TOL: f64 = 1e-6;
/// Negativity that triggers the PSD projection.
pub const PSD_TOL: f64 = 1e-10;
/// Columns closer than this to parallel are reported as unresolved.
const PARALLEL_TOL: f64 = 1e-6;

/// Finite momentum list on a box of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumBasis {
    momenta: Vec<f64>,
    box_length: f64,
    mass: f64,
}

impl MomentumBasis {
    pub fn new(momenta: Vec<f64>, box_length: f64, mass: f64) -> Result<Self> {
        if momenta.is_empty() {
            return Err(Error::Degenerate("empty momentum list".into()));
        }
        if !(box_length > 0.0) || !(mass > 0.0) {
            return Err(Error::OutOfRange(format!("box length {box_length} and mass {mass} must be positive")));
        }
        Ok(Self { momenta, box_length, mass })
    }

    /// Momenta of the grid bins inside `[P]`, ascending.
    pub fn from_grid<T: Real>(grid: &TimeGrid<T>, windows: &PhaseSpaceWindows<T>, mass: f64) -> Result<Self> {
        let fg = grid.frequencies();
        let bins = fg.indices_in(&windows.frequency_band());
        let mut momenta: Vec<f64> = bins.map(|i| -fg.frequency(i).as_f64()).collect();
        momenta.sort_by(f64::total_cmp);
        Self::new(momenta, grid.span().as_f64(), mass)
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Kinetic energy `p^2 / 2m` of level `j`.
    pub fn omega(&self, j: usize) -> f64 {
        self.momenta[j] * self.momenta[j] / (2.0 * self.mass)
    }

    /// Phase of `<x|p_j> e^{-i w_j t} (<x|p_k> e^{-i w_k t})^*`.
    fn phase(&self, j: usize, k: usize, x: f64, t: f64) -> f64 {
        TAU * (self.momenta[j] - self.momenta[k]) * x - (self.omega(j) - self.omega(k)) * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub basis: MomentumBasis,
    pub elements: CMatrix,
}

impl DensityMatrix {
    pub fn new(basis: MomentumBasis, elements: CMatrix) -> Result<Self> {
        let m = basis.len();
        if elements.nrows() != m || elements.ncols() != m {
            return Err(Error::Shape(format!("density matrix must be {m}x{m}")));
        }
        Ok(Self { basis, elements })
    }

    /// `|c><c|`.
    pub fn pure(basis: MomentumBasis, coeffs: &[Complex<f64>]) -> Result<Self> {
        let m = basis.len();
        if coeffs.len() != m {
            return Err(Error::Shape(format!("expected {m} coefficients, got {}", coeffs.len())));
        }
        Self::new(basis, CMatrix::from_fn(m, m, |j, k| coeffs[j] * coeffs[k].conj()))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.elements - self.elements.adjoint();
        d.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.elements)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("density matrices differ in size".into()));
        }
        Ok((&self.elements - &other.elements).iter().fold(0.0, |acc, z| acc.max(z.norm())))
    }

    /// Writes `j,k,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "k", "re", "im"])?;
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                let z = self.elements[(j, k)];
                w.write_record([j.to_string(), k.to_string(), fmt_num(z.re), fmt_num(z.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Unit-norm momentum amplitudes over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub basis: MomentumBasis,
    pub coeffs: Vec<Complex<f64>>,
}

impl MomentumState {
    /// `|<a|b>|` for states over the same basis.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Shape("states differ in dimension".into()));
        }
        let dot: Complex<f64> = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum();
        let na: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb: f64 = other.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(dot.norm() / (na * nb))
    }

    /// Coordinate wavefunction on a grid whose bins contain the basis momenta.
    pub fn to_wave_function<T: Real>(&self, grid: &TimeGrid<T>) -> Result<WaveFunction<T>> {
        let fg = grid.frequencies();
        if (grid.span().as_f64() - self.basis.box_length).abs() > 1e-12 * self.basis.box_length {
            return Err(Error::Shape("grid span differs from the basis box length".into()));
        }
        let mut spectrum = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        let scale = 1.0 / fg.dw().as_f64().sqrt();
        for (p, c) in self.basis.momenta.iter().zip(&self.coeffs) {
            let i = fg
                .index_of(T::of(-p))
                .ok_or_else(|| Error::OutOfRange(format!("momentum {p} is not a bin of the grid")))?;
            spectrum[i] = from_c64(c * scale);
        }
        let spec = crate::signal::Spectrum::new(*grid, spectrum)?;
        Ok(WaveFunction::from_signal(crate::signal::inverse_signal(&spec)))
    }
}

/// Momentum amplitudes `c_j = psi~(p_j) sqrt(dp)` of a coordinate state.
pub fn momentum_coefficients<T: Real>(psi: &WaveFunction<T>, basis: &MomentumBasis) -> Result<Vec<Complex<f64>>> {
    let spec = forward_spectrum(psi.signal());
    let fg = psi.grid().frequencies();
    let scale = fg.dw().as_f64().sqrt();
    basis
        .momenta
        .iter()
        .map(|p| {
            fg.index_of(T::of(-p))
                .map(|i| to_c64(spec.values()[i]) * scale)
                .ok_or_else(|| Error::OutOfRange(format!("momentum {p} is not a bin of the grid")))
        })
        .collect()
}

/// `|psi><psi| / <psi|psi>` on the momentum bins of `[P]`.
pub fn build_density<T: Real>(psi: &WaveFunction<T>, windows: &PhaseSpaceWindows<T>, mass: f64) -> Result<DensityMatrix> {
    let basis = MomentumBasis::from_grid(psi.grid(), windows, mass)?;
    let coeffs = momentum_coefficients(psi, &basis)?;
    let norm: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Degenerate("state has no weight in the momentum band".into()));
    }
    let unit: Vec<Complex<f64>> = coeffs.iter().map(|z| z / norm).collect();
    DensityMatrix::pure(basis, &unit)
}

/// Coordinate-diagonal readings `rho(x_i, t_n)`, rows over `x`, columns over `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSamples {
    pub x_points: Vec<f64>,
    pub t_points: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl EvolutionSamples {
    pub fn new(x_points: Vec<f64>, t_points: Vec<f64>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != x_points.len() || values.ncols() != t_points.len() {
            return Err(Error::Shape("sample matrix does not match the point lists".into()));
        }
        Ok(Self { x_points, t_points, values })
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes `x,t,rho`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "t", "rho"])?;
        for (i, x) in self.x_points.iter().enumerate() {
            for (n, t) in self.t_points.iter().enumerate() {
                w.write_record([fmt_num(*x), fmt_num(*t), fmt_num(self.values[(i, n)])])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Evolves `rho` freely and reads the coordinate diagonal.
pub fn evolve_diagonal_series(rho: &DensityMatrix, x_points: &[f64], t_points: &[f64]) -> EvolutionSamples {
    let basis = &rho.basis;
    let m = basis.len();
    let inv_l = 1.0 / basis.box_length;
    let values = DMatrix::from_fn(x_points.len(), t_points.len(), |i, n| {
        let (x, t) = (x_points[i], t_points[n]);
        let mut acc = 0.0;
        for j in 0..m {
            acc += rho.elements[(j, j)].re;
            for k in (j + 1)..m {
                // (j,k) and (k,j) together give twice the real part
                let z = Complex::from_polar(1.0, basis.phase(j, k, x, t)) * rho.elements[(j, k)];
                acc += 2.0 * z.re;
            }
        }
        acc * inv_l
    });
    EvolutionSamples { x_points: x_points.to_vec(), t_points: t_points.to_vec(), values }
}

#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub density: DensityMatrix,
    pub condition_number: f64,
    /// Least-squares residual norm.
    pub residual: f64,
    /// Largest minus second-largest eigenvalue of the output.
    pub rank_gap: f64,
    /// Negative eigenvalues were clipped.
    pub psd_projected: bool,
    /// Populations came from the rank-one completion; otherwise they are
    /// spread evenly over the trace.
    pub populations_resolved: bool,
}

fn pair_list(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|j| ((j + 1)..m).map(move |k| (j, k))).collect()
}

/// Least-squares inversion of the diagonal readings for a Hermitian `rho`.
pub fn tomography_solve(samples: &EvolutionSamples, basis: &MomentumBasis) -> Result<TomographyResult> {
    let m = basis.len();
    let pairs = pair_list(m);
    let unknowns = 1 + 2 * pairs.len();
    let rows = samples.x_points.len() * samples.t_points.len();
    if rows < m * m {
        return Err(Error::Degenerate(format!("{rows} readings for {} real unknowns", m * m)));
    }
    let inv_l = 1.0 / basis.box_length;
    let mut design = DMatrix::<f64>::zeros(rows, unknowns);
    let mut rhs = DVector::<f64>::zeros(rows);
    let mut row = 0;
    for (i, &x) in samples.x_points.iter().enumerate() {
        for (n, &t) in samples.t_points.iter().enumerate() {
            design[(row, 0)] = inv_l;
            for (c, &(j, k)) in pairs.iter().enumerate() {
                let phi = basis.phase(j, k, x, t);
                design[(row, 1 + 2 * c)] = 2.0 * inv_l * phi.cos();
                design[(row, 2 + 2 * c)] = -2.0 * inv_l * phi.sin();
            }
            rhs[row] = samples.values[(i, n)];
            row += 1;
        }
    }
    let condition_number = condition_number_real(&design);
    if !(condition_number <= DESIGN_CONDITION_LIMIT) {
        let unresolved = parallel_pairs(&design, &pairs);
        if unresolved.is_empty() {
            return Err(Error::IllConditioned { condition: condition_number, limit: DESIGN_CONDITION_LIMIT });
        }
        return Err(Error::RankDeficient { pairs: unresolved });
    }
    let (solution, residual) = least_squares(&design, &rhs)?;
    let trace = solution[0];
    let mut elements = CMatrix::zeros(m, m);
    for (c, &(j, k)) in pairs.iter().enumerate() {
        let z = Complex::new(solution[1 + 2 * c], solution[2 + 2 * c]);
        elements[(j, k)] = z;
        elements[(k, j)] = z.conj();
    }
    let populations = complete_populations(&elements, trace);
    let populations_resolved = populations.is_some();
    let populations = populations.unwrap_or_else(|| vec![trace / m as f64; m]);
    for (j, p) in populations.into_iter().enumerate() {
        elements[(j, j)] = Complex::new(p, 0.0);
    }
    let (elements, psd_projected) = psd_guard(elements);
    let eig = hermitian_eigenvalues(&elements);
    let rank_gap = eig[0] - eig.get(1).copied().unwrap_or(0.0);
    Ok(TomographyResult {
        density: DensityMatrix::new(basis.clone(), elements)?,
        condition_number,
        residual,
        rank_gap,
        psd_projected,
        populations_resolved,
    })
}

/// Off-diagonal pairs whose design columns coincide up to a phase.
fn parallel_pairs(design: &DMatrix<f64>, pairs: &[(usize, usize)]) -> Vec<((usize, usize), (usize, usize))> {
    let column = |c: usize| -> Vec<Complex<f64>> {
        (0..design.nrows()).map(|r| Complex::new(design[(r, 1 + 2 * c)], -design[(r, 2 + 2 * c)])).collect()
    };
    let cols: Vec<Vec<Complex<f64>>> = (0..pairs.len()).map(column).collect();
    let norms: Vec<f64> = cols.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut out = Vec::new();
    for a in 0..cols.len() {
        for b in (a + 1)..cols.len() {
            let dot: Complex<f64> = cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum();
            let dot_conj: Complex<f64> = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
            let cos = dot.norm().max(dot_conj.norm()) / (norms[a] * norms[b]);
            if cos > 1.0 - PARALLEL_TOL {
                out.push((pairs[a], pairs[b]));
            }
        }
    }
    out
}

/// Solves `u_j + u_k = 2 ln |rho_jk|` for `u = ln rho_jj` and rescales to the
/// trace. `None` when the significant off-diagonals do not pin down every `u`.
fn complete_populations(elements: &CMatrix, trace: f64) -> Option<Vec<f64>> {
    let m = elements.nrows();
    if m == 1 {
        return Some(vec![trace]);
    }
    let largest = (0..m).flat_map(|j| ((j + 1)..m).map(move |k| (j, k))).fold(0.0f64, |acc, (j, k)| acc.max(elements[(j, k)].norm()));
    if !(largest > 1e-12) {
        return None;
    }
    let edges: Vec<(usize, usize, f64)> = pair_list(m)
        .into_iter()
        .map(|(j, k)| (j, k, elements[(j, k)].norm()))
        .filter(|&(_, _, a)| a > 1e-8 * largest)
        .collect();
    if edges.len() < m {
        return None;
    }
    let a = DMatrix::from_fn(edges.len(), m, |e, c| if c == edges[e].0 || c == edges[e].1 { 1.0 } else { 0.0 });
    if condition_number_real(&a) > 1e8 {
        return None;
    }
    let b = DVector::from_iterator(edges.len(), edges.iter().map(|&(_, _, v)| 2.0 * v.ln()));
    let (u, _) = least_squares(&a, &b).ok()?;
    let raw: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    let total: f64 = raw.iter().sum();
    Some(raw.into_iter().map(|p| p * trace / total).collect())
}

/// Clips negative eigenvalues when they exceed the tolerance.
fn psd_guard(elements: CMatrix) -> (CMatrix, bool) {
    let hermitian = (&elements + elements.adjoint()) * Complex::new(0.5, 0.0);
    let (values, vectors) = hermitian_eigen(&hermitian);
    if values.iter().all(|&v| v >= -PSD_TOL) {
        return (hermitian, false);
    }
    let m = hermitian.nrows();
    let mut out = CMatrix::zeros(m, m);
    for (v, u) in values.iter().zip(&vectors) {
        if *v > 0.0 {
            out += u * u.adjoint() * Complex::new(*v, 0.0);
        }
    }
    (out, true)
}

/// Principal eigenvector of a rank-one density matrix, unit norm, with its
/// largest-magnitude coefficient real and positive.
pub fn rank1_extract(rho: &DensityMatrix) -> Result<MomentumState> {
    let (values, vectors) = hermitian_eigen(&rho.elements);
    if values.len() > 1 && values[1] > RANK1_TOL {
        return Err(Error::NotRankOne { eigenvalues: values });
    }
    let v = &vectors[0];
    let lead = v.iter().copied().fold(Complex::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
    let phase = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { Complex::new(1.0, 0.0) };
    let norm = v.norm();
    let coeffs = v.iter().map(|z| z * phase / norm).collect();
    Ok(MomentumState { basis: rho.basis.clone(), coeffs })
}

/// Settings for [`state_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    pub windows: PhaseSpaceWindows<T>,
    pub x_points: Vec<f64>,
    pub t_points: Vec<f64>,
    pub mass: f64,
    pub tol: T,
}

#[derive(Debug, Clone)]
pub struct PipelineResult<T> {
    pub tomography: TomographyResult,
    /// Density fed to the evolution, for comparison with the tomography output.
    pub truth: DensityMatrix,
    /// Overlap of the extracted state with the smoothed state.
    pub extraction_fidelity: f64,
    pub recovered: WaveFunction<T>,
    /// Overlap of the recovered state with the original.
    pub fidelity: T,
    pub recovery_iterations: usize,
}

/// Gate, smooth, evolve, read the diagonal, invert, extract, recover.
pub fn state_pipeline<T: Real>(psi_p: &WaveFunction<T>, cfg: &PipelineConfig<T>) -> Result<PipelineResult<T>> {
    let gated = crate::quantum::gate_state(psi_p, &cfg.windows)?;
    let smoothed = crate::quantum::momentum_smooth(&gated, &cfg.windows)?;
    let truth = build_density(&smoothed, &cfg.windows, cfg.mass)?;
    let samples = evolve_diagonal_series(&truth, &cfg.x_points, &cfg.t_points);
    let tomography = tomography_solve(&samples, &truth.basis)?;
    let extracted = rank1_extract(&tomography.density)?;
    let reference = rank1_extract(&truth)?;
    let extraction_fidelity = extracted.fidelity(&reference)?;
    let measured = extracted.to_wave_function(psi_p.grid())?;
    let recovery = recover_state(&measured, &cfg.windows, cfg.tol)?;
    let fidelity = recovery.state.fidelity(psi_p)?;
    Ok(PipelineResult {
        tomography,
        truth,
        extraction_fidelity,
        recovered: recovery.state,
        fidelity,
        recovery_iterations: recovery.report.iterations,
    })
}
