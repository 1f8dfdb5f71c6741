mod common;

use common::*;
use gaprecover::projections::ProjectorPair;
use gaprecover::tomography::{momentum_coefficients, PipelineConfig};
use gaprecover::{
    build_density, eps_grid, evolve_diagonal_series, gate_spill_ratio, gate_state, landau_pollak_ratio,
    momentum_smooth, operator_norm_sq, random_momentum_state, rank1_extract, recover_state, smoothed_gap_profile,
    state_pipeline, tomography_solve, DensityMatrix, Error, Grid, Interval, MomentumBasis, PhaseSpaceWindows,
    TimeGrid, Wave,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn windows(x: f64, p: f64) -> PhaseSpaceWindows<f64> {
    PhaseSpaceWindows::centered(x, p).unwrap()
}

fn psi_p(seed: u64) -> Wave {
    random_momentum_state(desk(), &band(2.0), seed).unwrap()
}

/// Box of length 4 with 64 points; `[P] = 2` holds 8 momenta.
fn coarse() -> Grid {
    TimeGrid::new(-2.0, 1.0 / 16.0, 64).unwrap()
}

fn x_points() -> Vec<f64> {
    (0..16).map(|i| i as f64 / 4.0).collect()
}

fn t_points() -> Vec<f64> {
    (0..16).map(|n| n as f64 * 7.3).collect()
}

fn random_coeffs(m: usize, seed: u64) -> Vec<C> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<C> = (0..m)
        .map(|_| C::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

#[test]
fn landau_pollak_bound_over_a_sweep() {
    for (p, x) in [(2.0, 0.25), (0.5, 1.8), (0.125, 2.0), (0.125, 0.8)] {
        let w = windows(x, p);
        let lambda = operator_norm_sq(&desk(), &w.frequency_band(), &w.x_window).unwrap().lambda0;
        assert!(lambda <= p * x + eps_grid(desk().dt(), p, x), "P={p} X={x}: {lambda}");
    }
    let ratio = landau_pollak_ratio(&psi_p(1), &windows(0.25, 2.0)).unwrap();
    assert!(ratio <= 0.5, "{ratio}");
}

#[test]
fn gating_spills_out_of_band() {
    let psi = psi_p(2);
    let w = windows(0.25, 2.0);
    let spill = gate_spill_ratio(&psi, &w).unwrap();
    assert!(spill >= 1.0 - w.px(), "{spill}");
    // identity: spill = 1 - <P_X P_P P_X> / <P_X>, checked with explicit projectors
    let pair = w.projectors(psi.grid()).unwrap();
    let inside = pair.gate(psi.signal()).unwrap();
    let kept = pair.band_project(&inside).unwrap();
    let expect = 1.0 - kept.norm_sq() / inside.norm_sq();
    assert!((spill - expect).abs() < 1e-12);
    let m = gate_state(&psi, &w).unwrap();
    let outside = m.signal().sub(&pair.band_project(m.signal()).unwrap()).unwrap();
    assert!(outside.norm_sq() > 0.0);
}

#[test]
fn smoothing_fills_the_gap_as_predicted() {
    let psi = psi_p(3);
    let w = windows(0.25, 2.0);
    let m = gate_state(&psi, &w).unwrap();
    let smooth = momentum_smooth(&m, &w).unwrap();
    assert!(smooth.signal().at(0.0).norm() > 1e-3);
    // unnormalized (1 - P_P P_X P_P) psi_P
    let pair = ProjectorPair::new(desk(), w.frequency_band(), w.x_window).unwrap();
    let lifted = pair.band_project(&pair.complement(psi.signal()).unwrap()).unwrap();
    let profile = smoothed_gap_profile(&psi, &w).unwrap();
    let scale = lifted.l2_norm();
    let on_gap: Vec<C> = pair.window_samples().map(|k| smooth.values()[k] * scale).collect();
    assert!(max_abs(&on_gap, &profile) <= 1e-8, "{}", max_abs(&on_gap, &profile));
}

#[test]
fn state_recovery_reaches_target_fidelity() {
    let psi = psi_p(4);
    let w = windows(0.25, 2.0);
    let smooth = momentum_smooth(&gate_state(&psi, &w).unwrap(), &w).unwrap();
    let rec = recover_state(&smooth, &w, 1e-8).unwrap();
    assert!(rec.state.fidelity(&psi).unwrap() >= 1.0 - 1e-8);
    // linear map followed by a real normalization keeps the phase
    let turned = recover_state(&smooth.with_phase(0.7), &w, 1e-8).unwrap();
    let expect = rec.state.with_phase(0.7);
    assert!(max_abs(turned.state.values(), expect.values()) < 1e-12);
    assert!(matches!(recover_state(&smooth, &windows(0.5, 2.0), 1e-8), Err(Error::Refused(_))));
    assert!(matches!(recover_state(&smooth, &windows(1.0, 2.0), 1e-8), Err(Error::Refused(_))));
}

#[test]
fn evolution_starts_at_the_coordinate_density() {
    let g = coarse();
    let w = windows(0.25, 2.0);
    let psi = random_momentum_state(g, &w.p_band, 5).unwrap();
    let rho = build_density(&psi, &w, 1.0).unwrap();
    let xs: Vec<f64> = g.times().collect();
    let s = evolve_diagonal_series(&rho, &xs, &[0.0]);
    for (m, v) in psi.values().iter().enumerate() {
        assert!((s.values[(m, 0)] - v.norm_sqr()).abs() <= 1e-6);
    }
}

#[test]
fn evolution_conserves_probability() {
    let g = coarse();
    let w = windows(0.25, 2.0);
    let rho = build_density(&random_momentum_state(g, &w.p_band, 6).unwrap(), &w, 1.0).unwrap();
    let xs: Vec<f64> = g.times().collect();
    let ts: Vec<f64> = (0..=20).map(|n| n as f64 * 0.5).collect();
    let s = evolve_diagonal_series(&rho, &xs, &ts);
    for n in 0..ts.len() {
        let total: f64 = (0..xs.len()).map(|i| s.values[(i, n)]).sum::<f64>() * g.dt();
        assert!((total - 1.0).abs() <= 1e-8, "t={}: {total}", ts[n]);
    }
    assert!(s.min_value() >= -1e-10);
}

#[test]
fn tomography_round_trip_random_state() {
    let basis = MomentumBasis::from_grid(&coarse(), &windows(0.25, 2.0), 1.0).unwrap();
    let truth = DensityMatrix::pure(basis.clone(), &random_coeffs(8, 21)).unwrap();
    let samples = evolve_diagonal_series(&truth, &x_points(), &t_points());
    let out = tomography_solve(&samples, &basis).unwrap();
    assert!(out.populations_resolved && !out.psd_projected);
    assert!(out.condition_number <= 1e10);
    assert!(out.density.max_abs_diff(&truth).unwrap() <= 1e-6);
    assert!(out.density.hermiticity_defect() < 1e-14);
    assert!(out.residual < 1e-10);
}

#[test]
fn tomography_separates_degenerate_frequencies() {
    let ps: Vec<f64> = [-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0].iter().map(|v| v / 8.0).collect();
    let basis = MomentumBasis::new(ps, 4.0, 1.0).unwrap();
    // (7/8, 1/8) and (-7/8, -1/8) share an energy difference but not a momentum difference
    let (a, b) = ((7, 4), (0, 3));
    assert_eq!(basis.omega(a.0) - basis.omega(a.1), basis.omega(b.0) - basis.omega(b.1));
    assert_ne!(basis.momenta()[a.0] - basis.momenta()[a.1], basis.momenta()[b.0] - basis.momenta()[b.1]);
    let truth = DensityMatrix::pure(basis.clone(), &random_coeffs(8, 22)).unwrap();
    let out = tomography_solve(&evolve_diagonal_series(&truth, &x_points(), &t_points()), &basis).unwrap();
    assert!(out.density.max_abs_diff(&truth).unwrap() <= 1e-6);
}

#[test]
fn diagonal_truth_gives_no_coherences() {
    let basis = MomentumBasis::from_grid(&coarse(), &windows(0.25, 2.0), 1.0).unwrap();
    let pops = [0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05];
    let diag = DMatrix::from_fn(8, 8, |j, k| if j == k { C::new(pops[j], 0.0) } else { C::new(0.0, 0.0) });
    let truth = DensityMatrix::new(basis.clone(), diag).unwrap();
    let out = tomography_solve(&evolve_diagonal_series(&truth, &x_points(), &t_points()), &basis).unwrap();
    for j in 0..8 {
        for k in 0..8 {
            if j != k {
                assert!(out.density.elements[(j, k)].norm() <= 1e-8);
            }
        }
    }
    assert!((out.density.trace() - 1.0).abs() < 1e-10);
}

#[test]
fn rank_one_extraction_recovers_the_state() {
    let g = coarse();
    let w = windows(0.25, 2.0);
    let psi = random_momentum_state(g, &w.p_band, 8).unwrap();
    let rho = build_density(&psi, &w, 1.0).unwrap();
    let st = rank1_extract(&rho).unwrap();
    let coeffs = momentum_coefficients(&psi, &rho.basis).unwrap();
    let dot: C = coeffs.iter().zip(&st.coeffs).map(|(a, b)| a.conj() * b).sum();
    assert!(dot.norm() >= 1.0 - 1e-10);
    let lead = st.coeffs.iter().copied().fold(C::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    assert!(lead.im == 0.0 && lead.re > 0.0);
}

fn pipeline_cfg() -> PipelineConfig<f64> {
    PipelineConfig { windows: windows(0.25, 2.0), x_points: x_points(), t_points: t_points(), mass: 1.0, tol: 1e-10 }
}

#[test]
fn full_pipeline_round_trip() {
    let psi = random_momentum_state(coarse(), &Interval::centered(2.0).unwrap(), 9).unwrap();
    let out = state_pipeline(&psi, &pipeline_cfg()).unwrap();
    assert!(out.extraction_fidelity >= 1.0 - 1e-10);
    assert!(out.tomography.density.max_abs_diff(&out.truth).unwrap() <= 1e-6);
    assert!(out.fidelity >= 1.0 - 1e-6, "{}", out.fidelity);
}

#[test]
fn pipeline_is_deterministic() {
    let psi = random_momentum_state(coarse(), &Interval::centered(2.0).unwrap(), 10).unwrap();
    let a = state_pipeline(&psi, &pipeline_cfg()).unwrap();
    let b = state_pipeline(&psi, &pipeline_cfg()).unwrap();
    assert_eq!(a.recovered, b.recovered);
    assert_eq!(a.tomography.density, b.tomography.density);
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.tomography.density.write_csv(&mut x).unwrap();
    b.tomography.density.write_csv(&mut y).unwrap();
    assert_eq!(x, y);
}
