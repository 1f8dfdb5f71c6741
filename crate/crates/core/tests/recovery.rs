mod common;

use common::*;
use gaprecover::recovery::{white_noise, STABILITY_SLACK};
use gaprecover::sampling::band_mean;
use gaprecover::{
    band_project, erase, forward_spectrum, invertibility_report, noise_stability_sweep, recover_band_neumann,
    recover_direct, recover_neumann, ErasureModel, Interval, SolverOptions,
};

fn gap(t: f64) -> Interval<f64> {
    Interval::centered(t).unwrap()
}

fn erased(t: f64) -> gaprecover::Signal {
    erase(&s_w(), &ErasureModel::new(gap(t), band(2.0))).unwrap()
}

#[test]
fn neumann_recovers_quarter_second_gap() {
    let s = s_w();
    let rep = recover_neumann(&erased(0.25), &band(2.0), &gap(0.25), &SolverOptions::default()).unwrap();
    assert!(rep.converged);
    let x = rep.recovered.unwrap();
    assert!(x.relative_error(&s).unwrap() <= 1e-6);
    assert!(rep.contraction_estimate <= 0.5f64.sqrt() + 0.02, "{}", rep.contraction_estimate);
    assert!(rep.residual_history.windows(2).all(|w| w[1] < w[0]));
    // error bound from the stopping rule
    let bound = 1e-10 / (1.0 - rep.lambda0.sqrt());
    assert!(x.relative_error(&s).unwrap() <= bound * 10.0);
}

#[test]
fn three_solvers_agree() {
    let r = erased(0.25);
    let opts = SolverOptions::default();
    let a = recover_neumann(&r, &band(2.0), &gap(0.25), &opts).unwrap().recovered.unwrap();
    let b = recover_band_neumann(&r, &band(2.0), &gap(0.25), &opts).unwrap().recovered.unwrap();
    let direct = recover_direct(&r, &band(2.0), &gap(0.25)).unwrap();
    let c = direct.recovered.unwrap();
    assert!(a.sub(&b).unwrap().l2_norm() <= 1e-8);
    assert!(b.sub(&c).unwrap().l2_norm() <= 1e-8);
    assert!(direct.condition_number.unwrap() < 10.0);
}

#[test]
fn band_iterates_stay_in_band() {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    gaprecover::recovery::recover_band_neumann_observed(
        &erased(0.25),
        &band(2.0),
        &gap(0.25),
        &SolverOptions::default(),
        |_, x| {
            let p = band_project(x, &band(2.0)).unwrap();
            worst = worst.max(p.sub(x).unwrap().l2_norm() / x.l2_norm());
            count += 1;
        },
    )
    .unwrap();
    assert!(count > 10);
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn invertibility_examples() {
    let g = desk();
    let quarter = invertibility_report(&g, &band(2.0), &gap(0.25)).unwrap();
    assert!(quarter.invertible && quarter.wt == 0.5);
    let one = invertibility_report(&g, &band(2.0), &gap(1.0)).unwrap();
    assert!(!one.invertible && !one.wt_below_one);
    let tiny = invertibility_report(&g, &band(2.0), &gap(1.0 / 64.0)).unwrap();
    assert!(tiny.invertible && tiny.lambda0 <= 1.0 / 32.0 + 1e-15, "{}", tiny.lambda0 - 1.0 / 32.0);
}

#[test]
fn every_solver_refuses_at_the_limit() {
    let r = erased(1.0);
    let opts = SolverOptions::default();
    for rep in [
        recover_neumann(&r, &band(2.0), &gap(1.0), &opts).unwrap(),
        recover_band_neumann(&r, &band(2.0), &gap(1.0), &opts).unwrap(),
        recover_direct(&r, &band(2.0), &gap(1.0)).unwrap(),
    ] {
        assert!(rep.is_refused());
        assert!(rep.recovered.is_none());
        assert_eq!(rep.iterations, 0);
        assert!(rep.refusal.unwrap().contains("WT"));
    }
}

#[test]
fn refusal_at_the_limit_is_not_from_conditioning() {
    // the dense operator is still comfortably invertible at W T = 2
    let eig = eigenvalues(&brute_gram(&desk(), &band(2.0), &gap(1.0)));
    assert!(1.0 - eig[0] > 1e-3, "{}", eig[0]);
}

#[test]
fn first_term_alone_is_close_for_a_tiny_gap() {
    let t = 1.0 / 64.0;
    let opts = SolverOptions { tol: 1e-10, k_max: Some(0) };
    let rep = recover_band_neumann(&erased(t), &band(2.0), &gap(t), &opts).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(!rep.converged);
    let got = forward_spectrum(&rep.recovered.unwrap());
    let truth = forward_spectrum(&s_w());
    let bound = 2.0 * 2.0 * t * band_mean(&truth, &band(2.0)).re;
    let fg = desk().frequencies();
    let sup = fg.indices_in(&band(2.0)).map(|k| (got.values()[k] - truth.values()[k]).norm()).fold(0.0, f64::max);
    assert!(sup <= bound, "{sup} > {bound}");
}

#[test]
fn zero_noise_sweep_meets_tolerance() {
    let rep = noise_stability_sweep(&s_w(), &band(2.0), &gap(0.25), &[0.0, 1e-3], 42, &SolverOptions::default()).unwrap();
    assert!(rep.rows[0].err <= 1e-8 * s_w().l2_norm());
    assert!(rep.rows[0].amplification.is_none());
    let amp = rep.rows[1].amplification.unwrap();
    assert!(amp <= STABILITY_SLACK / (1.0 - 0.5f64.sqrt()), "{amp}");
    assert!(rep.all_within_bound());
}

#[test]
fn amplification_grows_with_wt() {
    let amps: Vec<f64> = [0.05, 0.125, 0.25]
        .iter()
        .map(|&t| {
            let rep = noise_stability_sweep(&s_w(), &band(2.0), &gap(t), &[1e-3], 7, &SolverOptions::default()).unwrap();
            rep.rows[0].amplification.unwrap()
        })
        .collect();
    assert!(amps.windows(2).all(|w| w[0] <= w[1]), "{amps:?}");
}

#[test]
fn noise_is_reproducible_and_off_window() {
    let a = white_noise(&desk(), &gap(0.25), 9);
    let b = white_noise(&desk(), &gap(0.25), 9);
    assert_eq!(a, b);
    assert!((a.l2_norm() - 1.0).abs() < 1e-12);
    assert!(a.values()[2040..2056].iter().all(|v| v.norm() == 0.0));
    let mut x = Vec::new();
    let mut y = Vec::new();
    noise_stability_sweep(&s_w(), &band(2.0), &gap(0.25), &[1e-4, 1e-2], 3, &SolverOptions::default())
        .unwrap()
        .write_csv(&mut x)
        .unwrap();
    noise_stability_sweep(&s_w(), &band(2.0), &gap(0.25), &[1e-4, 1e-2], 3, &SolverOptions::default())
        .unwrap()
        .write_csv(&mut y)
        .unwrap();
    assert_eq!(x, y);
}

#[test]
fn residual_csv_lists_every_iteration() {
    let rep = recover_neumann(&erased(0.25), &band(2.0), &gap(0.25), &SolverOptions::default()).unwrap();
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("iter,residual\n1,"));
    assert_eq!(text.lines().count(), rep.residual_history.len() + 1);
}

#[test]
fn capped_iteration_is_flagged_partial() {
    let opts = SolverOptions { tol: 1e-10, k_max: Some(3) };
    let rep = recover_neumann(&erased(0.25), &band(2.0), &gap(0.25), &opts).unwrap();
    assert_eq!(rep.iterations, 3);
    assert!(!rep.converged);
    assert!(rep.recovered.is_some());
}
