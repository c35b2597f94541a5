//! Evaluation measures, baselines and the SNR-grid harness.

mod common;

use common::*;
use freqdenoise::data::{
    generate_synthetic_corpus, derive_rng, make_model_inputs, split_by_kind, standardize,
    synthesize, Segment, SegmentPools, SignalKind, SnrConvention,
};
use freqdenoise::metrics::{
    cc, evaluate, evaluate_method, report_csv, rrmse_f, rrmse_t, EvalConfig, Method, Scores,
};
use freqdenoise::model::init_params;
use proptest::prelude::*;

fn test_split() -> (Vec<Segment>, Vec<Segment>) {
    let (_, test) = split_by_kind(&generate_synthetic_corpus(30, 128, 2), 0.6, 2).unwrap();
    let eeg = test.iter().filter(|s| s.kind == SignalKind::Eeg).cloned().collect();
    (eeg, test)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[test]
fn identity_error_has_closed_form() {
    let corpus = generate_synthetic_corpus(3, 256, 9);
    for (x, n) in [(&corpus[0], &corpus[3]), (&corpus[1], &corpus[8])] {
        let m = synthesize(x, n, 0.0, SnrConvention::RmsRatio).unwrap();
        let s = standardize(&m).unwrap();
        let mi = make_model_inputs(&s).unwrap();
        let pred = Method::Identity.apply(&mi).unwrap();
        // ŷ − x̂ = λn/σ and x̂ = (x − ȳ)/σ, so σ cancels
        let centred: Vec<f64> = m.x.data().iter().map(|v| v - s.mean_y).collect();
        let want = norm(&m.scaled_noise()) / norm(&centred);
        let got = rrmse_t(s.x_hat.data(), pred.data()).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn report_has_one_row_per_level() {
    let (eeg, test) = test_split();
    let eval = EvalConfig {
        per_level_count: 4,
        ..EvalConfig::default()
    };
    let r = evaluate_method(Method::OracleSpectral, &eeg, &test, SignalKind::Emg, &eval, 1, 1).unwrap();
    assert_eq!(r.rows.len(), 10);
    assert_eq!(r.rows.iter().map(|row| row.snr_db).collect::<Vec<_>>(), eval.snr_grid);
    assert!(r.rows.iter().all(|row| row.n_examples == 4));
    assert_eq!(r.summary.n_examples, 40);
    assert!((r.summary.snr_db + 2.5).abs() < 1e-12);
    let mean_t = r.rows.iter().map(|row| row.rrmse_t).sum::<f64>() / 10.0;
    assert!((r.summary.rrmse_t - mean_t).abs() < 1e-12);
    assert_eq!(report_csv(&r).lines().count(), 12);
}

#[test]
fn evaluation_is_deterministic() {
    let (eeg, test) = test_split();
    let cfg = small_config(128);
    let params = init_params(&cfg, 4);
    let eval = EvalConfig {
        per_level_count: 3,
        ..EvalConfig::default()
    };
    let run = |threads, seed| evaluate(&params, &cfg, &eeg, &test, SignalKind::Eog, &eval, seed, threads).unwrap();
    let a = run(1, 5);
    assert_eq!(a, run(1, 5));
    assert_eq!(a, run(4, 5));
    assert_ne!(a, run(1, 6));
}

#[test]
fn methods_see_the_same_mixtures() {
    let (eeg, test) = test_split();
    let eval = EvalConfig {
        snr_grid: vec![-3.0],
        per_level_count: 5,
        ..EvalConfig::default()
    };
    let pools = SegmentPools::from_segments(eeg.iter().cloned().chain(test.iter().filter(|s| s.kind == SignalKind::Eog).cloned()));
    let mut sum = 0.0;
    for i in 0..5u64 {
        let mut rng = derive_rng(8, &[0x6576_616c, SignalKind::Eog.code() as u64, 0, i]);
        let m = pools.draw_mixture(SignalKind::Eog, (-3.0, -3.0), SnrConvention::RmsRatio, &mut rng).unwrap();
        let s = standardize(&m).unwrap();
        sum += rrmse_t(s.x_hat.data(), s.y_hat.data()).unwrap();
    }
    let r = evaluate_method(Method::Identity, &eeg, &test, SignalKind::Eog, &eval, 8, 1).unwrap();
    assert!((r.summary.rrmse_t - sum / 5.0).abs() < 1e-12);
}

#[test]
fn oracle_spectral_beats_identity() {
    let (eeg, test) = test_split();
    for kind in [SignalKind::Eog, SignalKind::Emg] {
        let eval = EvalConfig {
            per_level_count: 10,
            ..EvalConfig::default()
        };
        let id = evaluate_method(Method::Identity, &eeg, &test, kind, &eval, 3, 2).unwrap();
        let or = evaluate_method(Method::OracleSpectral, &eeg, &test, kind, &eval, 3, 2).unwrap();
        assert!(or.summary.rrmse_t < id.summary.rrmse_t, "{kind}");
        assert!(or.summary.rrmse_f < id.summary.rrmse_f, "{kind}");
        assert!(or.summary.cc > id.summary.cc, "{kind}");
    }
}

#[test]
fn rejects_bad_requests() {
    let (eeg, test) = test_split();
    let eval = EvalConfig::default();
    assert!(evaluate_method(Method::Identity, &eeg, &test, SignalKind::Eeg, &eval, 0, 1).is_err());
    assert!(evaluate_method(Method::Identity, &[], &test, SignalKind::Eog, &eval, 0, 1).is_err());
    let empty = EvalConfig {
        per_level_count: 0,
        ..EvalConfig::default()
    };
    assert!(evaluate_method(Method::Identity, &eeg, &test, SignalKind::Eog, &empty, 0, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measures_ignore_common_scale(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let x = uniform(&mut r, &[64], -1.0, 1.0);
        let y = uniform(&mut r, &[64], -1.0, 1.0);
        let (xs, ys) = (x.scale(c), y.scale(c));
        let a = Scores::compute(x.data(), y.data()).unwrap();
        let b = Scores::compute(xs.data(), ys.data()).unwrap();
        prop_assert!((a.rrmse_t - b.rrmse_t).abs() < 1e-10);
        prop_assert!((a.rrmse_f - b.rrmse_f).abs() < 1e-10);
        prop_assert!((a.cc - b.cc).abs() < 1e-10);
        // correlation also ignores an affine map of the estimate
        let shifted: Vec<f64> = y.data().iter().map(|v| c * v - 3.0).collect();
        prop_assert!((cc(x.data(), &shifted).unwrap() - a.cc).abs() < 1e-10);
        prop_assert!(a.cc.abs() <= 1.0);
    }

    #[test]
    fn perfect_estimate_scores_perfectly(seed in any::<u64>()) {
        let x = uniform(&mut rng(seed), &[32], -1.0, 1.0);
        prop_assert_eq!(rrmse_t(x.data(), x.data()).unwrap(), 0.0);
        prop_assert_eq!(rrmse_f(x.data(), x.data()).unwrap(), 0.0);
        prop_assert!((cc(x.data(), x.data()).unwrap() - 1.0).abs() < 1e-12);
        let neg = x.scale(-1.0);
        prop_assert!(rrmse_f(x.data(), neg.data()).unwrap() < 1e-12);
    }
}
