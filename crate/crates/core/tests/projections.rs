mod common;

use common::*;
use gaprecover::projections::{ProjectorPair, POWER_MAX_ITER, POWER_TOL};
use gaprecover::{
    band_project, band_spill_ratio, complement_gate, concentration_ratio, eps_grid, forward_spectrum,
    make_demo_signal, operator_norm_sq, segment_compatibility, smear_response, time_gate, Interval, Signal,
};

/// `(W, T)` pairs on the default grid with `WT` in {0.1, 0.25, 0.5, 0.9}.
const SWEEP: [(f64, f64); 4] = [(0.125, 0.8), (0.125, 2.0), (2.0, 0.25), (0.5, 1.8)];

#[test]
fn band_projection_is_idempotent() {
    let s = make_demo_signal(&desk()).unwrap();
    let once = band_project(&s, &band(2.0)).unwrap();
    let twice = band_project(&once, &band(2.0)).unwrap();
    assert!(twice.sub(&once).unwrap().l2_norm() < 1e-14);
    let spec = forward_spectrum(&twice);
    let fg = desk().frequencies();
    for k in 0..desk().len() {
        if !band(2.0).contains(fg.frequency(k)) {
            assert!(spec.values()[k].norm() < 1e-15);
        }
    }
    assert!(once.l2_norm() <= s.l2_norm());
}

#[test]
fn gated_demo_spreads_back_into_the_gap() {
    let s = make_demo_signal(&desk()).unwrap();
    let gapped = complement_gate(&s, &Interval::centered(0.25).unwrap()).unwrap();
    assert_eq!(gapped.at(0.0).norm(), 0.0);
    let smooth = band_project(&gapped, &band(2.0)).unwrap();
    assert!(smooth.at(0.0).norm() > 0.1);
}

#[test]
fn gates_partition_the_signal() {
    let s = make_demo_signal(&desk()).unwrap();
    let w = Interval::new(0.3, 1.7).unwrap();
    let a = time_gate(&s, &w).unwrap();
    let b = complement_gate(&s, &w).unwrap();
    assert_eq!(a.add(&b).unwrap(), s);
    assert!((a.norm_sq() + b.norm_sq() - s.norm_sq()).abs() <= 1e-13 * s.norm_sq());
}

#[test]
fn narrowest_gate_removes_one_sample() {
    let s = Signal::from_real_fn(desk(), |_| 1.0);
    let g = complement_gate(&s, &Interval::new(0.0, 1.0 / 64.0).unwrap()).unwrap();
    let removed: Vec<usize> = (0..s.len()).filter(|&m| g.values()[m].norm() == 0.0).collect();
    assert_eq!(removed, vec![2048]);
}

#[test]
fn smear_response_matches_quadrature() {
    let b = band(2.0);
    assert_eq!(smear_response(&b, 0.0).re, 2.0);
    assert!(smear_response(&b, 0.5).norm() < 1e-15);
    let n = 200_000;
    let h = 2.0 / n as f64;
    let quad: C = (0..n).map(|j| expi(-2.0 * std::f64::consts::PI * (-1.0 + (j as f64 + 0.5) * h) * 0.125)).sum::<C>() * h;
    let closed = smear_response(&b, 0.125);
    let pi4 = std::f64::consts::FRAC_PI_4;
    assert!((closed.re - 2.0 * pi4.sin() / pi4).abs() < 1e-14);
    assert!((closed - quad).norm() < 1e-9);
}

/// `||P_T P_W s||^2 / ||P_W s||^2` from explicit sums.
fn concentration_oracle(s: &Signal, w: &Interval<f64>, t: &Interval<f64>) -> f64 {
    let g = *s.grid();
    let fg = g.frequencies();
    let bins: Vec<usize> = (0..g.len()).filter(|&k| w.contains(fg.frequency(k))).collect();
    let coeffs: Vec<(f64, C)> = bins.iter().map(|&k| (fg.frequency(k), naive_forward(&g, s.values(), fg.frequency(k)))).collect();
    let total: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>() * fg.dw();
    let inside: f64 = (0..g.len())
        .filter(|&m| t.contains(g.time(m)))
        .map(|m| {
            let tm = g.time(m);
            (coeffs.iter().map(|(w, c)| c * expi(-2.0 * std::f64::consts::PI * w * tm)).sum::<C>() * fg.dw()).norm_sqr()
        })
        .sum::<f64>()
        * g.dt();
    inside / total
}

#[test]
fn demo_concentration_below_wt() {
    let s = make_demo_signal(&desk()).unwrap();
    let (w, t) = (band(2.0), Interval::centered(0.25).unwrap());
    let r = concentration_ratio(&s, &w, &t).unwrap();
    assert!(r > 0.0 && r <= 0.5, "{r}");
    assert!((r - concentration_oracle(&s, &w, &t)).abs() < 1e-10);
    let whole = concentration_ratio(&s, &w, &Interval::centered(64.0).unwrap()).unwrap();
    assert!((whole - 1.0).abs() < 1e-12);
}

#[test]
fn swapped_roles_obey_the_same_bound() {
    let s = make_demo_signal(&desk()).unwrap();
    for (wd, td) in SWEEP {
        let r = segment_compatibility(&s, &Interval::centered(td).unwrap(), &band(wd)).unwrap();
        assert!(r <= wd * td + eps_grid(desk().dt(), wd, td), "W={wd} T={td}: {r}");
    }
}

#[test]
fn top_eigenvalue_matches_dense_oracle() {
    let g = desk();
    for (wd, td) in SWEEP {
        let (w, t) = (band(wd), Interval::centered(td).unwrap());
        let p = operator_norm_sq(&g, &w, &t).unwrap();
        let gram = brute_gram(&g, &w, &t);
        let eig = eigenvalues(&gram);
        assert!((p.lambda0 - eig[0]).abs() < 1e-8, "W={wd} T={td}: {} vs {}", p.lambda0, eig[0]);
        assert!(p.lambda0 <= wd * td + eps_grid(g.dt(), wd, td));
        assert!((trace(&gram) - wd * td).abs() <= 0.02 * wd * td, "trace {}", trace(&gram));
    }
}

#[test]
fn full_window_top_eigenvalue_is_one() {
    let p = operator_norm_sq(&desk(), &band(2.0), &Interval::centered(64.0).unwrap()).unwrap();
    assert!((p.lambda0 - 1.0).abs() < 1e-10);
}

#[test]
fn power_iteration_reports_eigenvector() {
    let pair = ProjectorPair::new(desk(), band(2.0), Interval::centered(0.25).unwrap()).unwrap();
    let p = gaprecover::projections::power_iteration(&pair, POWER_TOL, POWER_MAX_ITER).unwrap();
    let av = pair.concentration_apply(&p.eigenvector);
    let defect: f64 = av.iter().zip(&p.eigenvector).map(|(a, v)| (a - v * p.lambda0).norm_sqr()).sum::<f64>().sqrt();
    assert!(defect < 1e-5, "{defect}");
}

#[test]
fn spill_is_at_least_one_minus_wt() {
    let s = s_w();
    let sw = |wd: f64| band_project(&make_demo_signal(&desk()).unwrap(), &band(wd)).unwrap();
    for (wd, td) in SWEEP {
        let spill = band_spill_ratio(&sw(wd), &band(wd), &Interval::centered(td).unwrap()).unwrap();
        assert!(spill >= 1.0 - wd * td - eps_grid(desk().dt(), wd, td), "W={wd} T={td}: {spill}");
    }
    let full = band_spill_ratio(&s, &band(2.0), &Interval::centered(64.0).unwrap()).unwrap();
    assert!(full.abs() < 1e-10);
    let r = complement_gate(&s, &Interval::centered(0.25).unwrap()).unwrap();
    let outside = r.sub(&band_project(&r, &band(2.0)).unwrap()).unwrap();
    assert!(outside.norm_sq() > 0.0);
}

#[test]
fn long_segment_of_a_tone_is_certified() {
    let tone = Signal::from_fn(desk(), |t| expi(-2.0 * std::f64::consts::PI * 0.5 * t));
    let r = segment_compatibility(&tone, &Interval::centered(16.0).unwrap(), &band(2.0)).unwrap();
    assert!(r >= 0.99, "{r}");
    let short = segment_compatibility(&tone, &Interval::centered(0.25).unwrap(), &band(2.0)).unwrap();
    assert!(short <= 0.5);
    let whole = segment_compatibility(&s_w(), &Interval::centered(64.0).unwrap(), &band(2.0)).unwrap();
    assert!((whole - 1.0).abs() < 1e-10);
}
