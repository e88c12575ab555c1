use proptest::prelude::*;
use superbunch::imaging::{default_double_slit, TemporalObject};
use superbunch::theory::{
    g2_kernel, predicted_visibility, theoretical_image, white_noise_image, BandwidthSet, Boundary, ObjectModel,
    TheoryOptions,
};
use superbunch::Error;

fn bands_strategy() -> impl Strategy<Value = BandwidthSet> {
    prop::collection::vec(0.1f64..20.0, 1..=6).prop_map(|b| BandwidthSet::new(b).unwrap())
}

fn object_strategy() -> impl Strategy<Value = TemporalObject> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..=1.0], 4..40)
        .prop_filter("transparent somewhere", |a| a.iter().any(|&x| x > 0.0))
        .prop_map(|a| TemporalObject::new(a).unwrap())
}

fn piecewise(step: f64) -> TheoryOptions {
    TheoryOptions { step, model: ObjectModel::PiecewiseConstant, ..TheoryOptions::default() }
}

proptest! {
    #[test]
    fn kernel_is_bounded_and_even(bands in bands_strategy(), tau in 1e-3f64..200.0) {
        let top = 2f64.powi(bands.rg_count() as i32);
        let k = g2_kernel(tau, &bands);
        prop_assert!(k >= 1.0 && k < top, "K({}) = {}", tau, k);
        prop_assert_eq!(k, g2_kernel(-tau, &bands));
        prop_assert_eq!(g2_kernel(0.0, &bands), top);
    }

    #[test]
    fn image_never_dips_below_background(object in object_strategy(), bands in bands_strategy()) {
        for opts in [TheoryOptions::default(), piecewise(0.25)] {
            let curve = theoretical_image(&object, &bands, &opts).unwrap();
            for g in &curve.g2 {
                prop_assert!(*g >= 1.0 - 1e-12, "{}", g);
            }
        }
    }

    #[test]
    fn periodic_image_follows_translation(object in object_strategy(), bands in bands_strategy(), k in 0usize..40) {
        let opts = TheoryOptions::default();
        let a = theoretical_image(&object, &bands, &opts).unwrap();
        let b = theoretical_image(&object.shifted(k), &bands, &opts).unwrap();
        let t = object.period_bins();
        for i in 0..t {
            let j = (i + k) % t;
            prop_assert!((a.g2[i] - b.g2[j]).abs() <= 1e-12 * a.g2[i], "{} vs {}", a.g2[i], b.g2[j]);
        }
    }

    #[test]
    fn visibility_rises_with_stage_count(object in object_strategy()) {
        let peak = object.peak_bins();
        let mut last = 0.0;
        for n in 1..=8 {
            let v = predicted_visibility(&object, n, &peak).unwrap();
            prop_assert!(v > last && v < 1.0);
            last = v;
        }
    }

    #[test]
    fn bin_sampled_approaches_white_noise(object in object_strategy(), n in 1u32..=6) {
        // Δω = 2π puts every integer lag on a sinc zero.
        let bands = BandwidthSet::uniform(n, 2.0 * std::f64::consts::PI).unwrap();
        let theory = theoretical_image(&object, &bands, &TheoryOptions::default()).unwrap();
        let closed = white_noise_image(&object, n).unwrap();
        for (a, b) in theory.g2.iter().zip(&closed.g2) {
            prop_assert!((a - b).abs() < 1e-12 * b, "{} vs {}", a, b);
        }
    }
}

#[test]
fn piecewise_quadrature_converges_on_step_halving() {
    let object = default_double_slit();
    let bands = BandwidthSet::fwhm_matched(3, 1.0).unwrap();
    let reference = theoretical_image(&object, &bands, &piecewise(1.0 / 256.0)).unwrap().g2;
    let max_error = |step: f64| {
        let g = theoretical_image(&object, &bands, &piecewise(step)).unwrap().g2;
        g.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let errors: Vec<f64> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&h| max_error(h)).collect();
    for w in errors.windows(2) {
        // Simpson is fourth order; allow generous slack for the kinks at bin edges.
        assert!(w[1] < w[0] / 4.0, "{errors:?}");
    }
}

#[test]
fn piecewise_error_estimate_bounds_actual_error() {
    let object = default_double_slit();
    for n in [1, 4] {
        let bands = BandwidthSet::fwhm_matched(n, 2.0).unwrap();
        let reference = theoretical_image(&object, &bands, &piecewise(1.0 / 256.0)).unwrap().g2;
        let curve = theoretical_image(&object, &bands, &piecewise(0.1)).unwrap();
        for ((g, r), e) in curve.g2.iter().zip(&reference).zip(&curve.error_estimate) {
            assert!((g - r).abs() <= *e, "N={n}: |{g} - {r}| > {e}");
        }
    }
}

#[test]
fn wide_bandwidth_agrees_with_closed_form() {
    let object = default_double_slit();
    for n in 1..=6 {
        let bands = BandwidthSet::uniform(n, 200.0).unwrap();
        let kernel = theoretical_image(&object, &bands, &TheoryOptions::default()).unwrap();
        let closed = white_noise_image(&object, n).unwrap();
        for (a, b) in kernel.g2.iter().zip(&closed.g2) {
            assert!((a - b).abs() / b < 0.02, "N={n}: {a} vs {b}");
        }
    }
}

#[test]
fn boundary_modes_agree_away_from_edges() {
    let object = default_double_slit();
    let bands = BandwidthSet::fwhm_matched(2, 1.0).unwrap();
    let periodic = theoretical_image(&object, &bands, &TheoryOptions::default()).unwrap();
    let truncated = theoretical_image(
        &object,
        &bands,
        &TheoryOptions { boundary: Boundary::Truncated, ..TheoryOptions::default() },
    )
    .unwrap();
    // The slits sit mid-period, so wrapped lags only add far-tail kernel mass.
    for (a, b) in periodic.g2.iter().zip(&truncated.g2) {
        assert!((a - b).abs() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn ambiguous_peak_is_rejected() {
    let object = default_double_slit();
    let mixed: Vec<usize> = vec![25, 62];
    assert!(matches!(predicted_visibility(&object, 2, &mixed), Err(Error::AmbiguousPeak { .. })));
    assert!(matches!(predicted_visibility(&object, 2, &[]), Err(Error::Selection(_))));
}

#[test]
fn opaque_object_cannot_be_normalized() {
    let object = TemporalObject::new(vec![0.0; 10]).unwrap();
    let bands = BandwidthSet::uniform(1, 1.0).unwrap();
    assert!(matches!(theoretical_image(&object, &bands, &TheoryOptions::default()), Err(Error::Normalization(_))));
}
