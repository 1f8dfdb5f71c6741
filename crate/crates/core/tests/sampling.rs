mod common;

use common::*;
use gaprecover::sampling::{band_l2_distance, band_mean, band_sup_distance, check_first_order, shift_spectrum};
use gaprecover::{
    band_approx_first_term, band_interpolate, band_project, comb_sample, erase, forward_spectrum,
    integral_equation_residual, make_demo_signal, periodized_spectrum, sinc_reconstruct, spectral_copy_recover,
    ErasureModel, Interval, Signal, SpectralCopyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fig2_erasure(t_ds: f64) -> Signal {
    erase(&s_w(), &ErasureModel::new(Interval::centered(t_ds).unwrap(), band(2.0))).unwrap()
}

#[test]
fn reconstruction_reproduces_samples() {
    let s = make_demo_signal(&desk()).unwrap();
    let c = comb_sample(&s, 0.25).unwrap();
    let rec = sinc_reconstruct(&c, &desk()).unwrap();
    assert!(max_abs(&c.resample(&rec).unwrap(), c.values()) <= 1e-10);
    // spectrum confined to [-2, 2)
    let spec = forward_spectrum(&rec);
    let fg = desk().frequencies();
    let leak = (0..desk().len())
        .filter(|&k| !band(4.0).contains(fg.frequency(k)))
        .map(|k| spec.values()[k].norm())
        .fold(0.0, f64::max);
    assert!(leak <= 1e-3);
}

#[test]
fn interpolation_at_full_rate_is_reconstruction() {
    let c = comb_sample(&make_demo_signal(&desk()).unwrap(), 0.25).unwrap();
    let a = band_interpolate(&c, &band(4.0)).unwrap();
    let b = sinc_reconstruct(&c, &desk()).unwrap();
    assert!(max_abs(a.values(), b.values()) <= 1e-10);
    let narrow = band_interpolate(&c, &band(2.0)).unwrap();
    let via = band_project(&b, &band(2.0)).unwrap();
    assert!(max_abs(narrow.values(), via.values()) <= 1e-10);
}

#[test]
fn nyquist_rate_sampling_is_exact() {
    let s = s_w();
    let c = comb_sample(&s, 0.25).unwrap();
    let back = band_interpolate(&c, &band(2.0)).unwrap();
    assert!(interior_sup(&back, &s) <= 1e-6);
    assert!(max_abs(&c.resample(&back).unwrap(), c.values()) <= 1e-6);
}

#[test]
fn undersampling_aliases() {
    let s = s_w();
    let truth = forward_spectrum(&s);
    let c = comb_sample(&s, 1.0).unwrap();
    let alias = band_sup_distance(&periodized_spectrum(&c), &truth, &band(2.0)).unwrap();
    assert!(alias >= 1e-2, "{alias}");
    let back = band_interpolate(&c, &band(1.0)).unwrap();
    assert!(interior_sup(&back, &s) >= 1e-2);
}

#[test]
fn periodization_is_sum_of_shifted_copies() {
    let s = make_demo_signal(&desk()).unwrap();
    let spec = forward_spectrum(&s);
    for period in [0.25, 0.5, 1.0] {
        let c = comb_sample(&s, period).unwrap();
        let p = periodized_spectrum(&c);
        let step = (1.0 / period / desk().frequencies().dw()).round() as i64;
        let copies = c.stride() as i64;
        let mut oracle = vec![C::new(0.0, 0.0); desk().len()];
        for j in 0..copies {
            let shifted = shift_spectrum(&spec, j * step);
            oracle.iter_mut().zip(shifted.values()).for_each(|(o, v)| *o += v);
        }
        assert!(max_abs(p.values(), &oracle) <= 1e-8, "period {period}");
        // period 1/T in frequency, bin exact
        let again = shift_spectrum(&p, step);
        assert!(max_abs(p.values(), again.values()) <= 1e-12);
    }
    let truth = forward_spectrum(&s_w());
    let c = comb_sample(&s_w(), 0.25).unwrap();
    assert!(band_sup_distance(&periodized_spectrum(&c), &truth, &band(2.0)).unwrap() <= 1e-6);
}

/// Gap shrunk by one sample so the teeth at `1/8 + k/4` sit outside it.
fn copy_config(k_max: usize) -> SpectralCopyConfig<f64> {
    let mut cfg = SpectralCopyConfig::new(band(2.0), 0.25, 0.25);
    cfg.allow_equal = true;
    cfg.comb_offset = 0.125;
    cfg.k_max = k_max;
    cfg
}

#[test]
fn spectral_copies_improve_fig2_recovery() {
    let r = fig2_erasure(0.25 - 1.0 / 64.0);
    let truth = forward_spectrum(&s_w());
    let errs: Vec<f64> = (0..=8)
        .map(|k| band_l2_distance(&spectral_copy_recover(&r, &copy_config(k)).unwrap().spectrum, &truth, &band(2.0)).unwrap())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] < errs[0]);
    assert!(errs[8] < 1e-10, "{errs:?}");
}

#[test]
fn ungated_input_needs_no_copies() {
    let truth = forward_spectrum(&s_w());
    let out = spectral_copy_recover(&s_w(), &copy_config(0)).unwrap();
    assert!(band_sup_distance(&out.spectrum, &truth, &band(2.0)).unwrap() <= 1e-6);
}

#[test]
fn first_order_model_at_small_gap() {
    let truth = forward_spectrum(&s_w());
    let t = 1.0 / 64.0;
    let approx = band_approx_first_term(&fig2_erasure(t), &band(2.0), t).unwrap();
    assert!(approx.warning.is_none() && !approx.distorted);
    let chk = check_first_order(&approx, &truth, &band(2.0)).unwrap();
    assert!(chk.within_bound(), "{chk:?}");
    assert!(chk.explained(), "{chk:?}");
    // the estimate from r alone tracks the true offset
    assert!((approx.predicted_offset - chk.offset).abs() < 1e-3 * chk.offset);
    let mean = band_mean(&truth, &band(2.0)).re;
    assert!((chk.bound - 2.0 * 2.0 * t * mean).abs() < 1e-15);
}

#[test]
fn first_term_error_shrinks_with_gap() {
    let truth = forward_spectrum(&s_w());
    let errs: Vec<f64> = [1.0, 0.25, 1.0 / 64.0]
        .iter()
        .map(|&t| {
            let a = band_approx_first_term(&fig2_erasure(t), &band(2.0), t).unwrap();
            band_l2_distance(&a.approx, &truth, &band(2.0)).unwrap()
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(band_approx_first_term(&fig2_erasure(1.0), &band(2.0), 1.0).unwrap().distorted);
}

#[test]
fn integral_equation_holds_for_matched_pairs() {
    let s_hat = forward_spectrum(&s_w());
    let w = Interval::centered(0.25).unwrap();
    let r_hat = forward_spectrum(&fig2_erasure(0.25));
    assert!(integral_equation_residual(&s_hat, &r_hat, &band(2.0), &w).unwrap() <= 1e-6);
    let none = Interval::centered(0.0).unwrap();
    let direct = band_l2_distance(&r_hat, &s_hat, &band(2.0)).unwrap();
    let res = integral_equation_residual(&s_hat, &r_hat, &band(2.0), &none).unwrap();
    assert!((res - direct).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Signal::new(desk(), (0..desk().len()).map(|_| C::new(rng.random(), 0.0)).collect()).unwrap();
    let other = forward_spectrum(&band_project(&noise, &band(2.0)).unwrap());
    assert!(integral_equation_residual(&other, &r_hat, &band(2.0), &w).unwrap() > 1e-3);
}
