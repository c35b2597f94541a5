//! Architecture contracts, checked against a loop-based re-implementation
//! of the whole network.

mod common;

use common::*;
use freqdenoise::model::weights::{decode_weights, encode_weights};
use freqdenoise::model::{
    apply_filter_bank, closed_form_param_count, denoise, filter_banks, init_params,
    load_weights, param_layout, save_weights, ModelConfig, ModelParams,
};
use freqdenoise::tensor::{fft, Tensor};
use proptest::prelude::*;

fn kernels(t: &Tensor) -> Vec<Vec<Vec<f64>>> {
    let s = t.shape();
    t.data()
        .chunks(s[1] * s[2])
        .map(|o| o.chunks(s[2]).map(<[f64]>::to_vec).collect())
        .collect()
}

/// The network written out with explicit loops and an `O(N²)` inverse DFT.
fn reference_forward(cfg: &ModelConfig, p: &ModelParams, noisy: &[f64], pn: &[f64], py: &[f64]) -> Vec<f64> {
    let ratio: Vec<f64> = py.iter().zip(pn).map(|(a, b)| a / (b + cfg.epsilon_ratio)).collect();
    let spectra = vec![pn.to_vec(), py.to_vec(), ratio];
    let n = cfg.signal_length;

    let mut banks = Vec::new();
    for s in 1..=cfg.steps {
        let mut branch = Vec::new();
        for tag in ["real", "imag"] {
            let mut h = spectra.clone();
            for l in 0..cfg.branch_layers {
                let w = p.get(&format!("step{s}.{tag}.layer{l}.kernel")).unwrap();
                let b = p.get(&format!("step{s}.{tag}.layer{l}.bias")).unwrap();
                h = brute_conv(&h, &kernels(w))
                    .into_iter()
                    .zip(b.data())
                    .map(|(row, bias)| row.iter().map(|v| (v + bias).tanh()).collect())
                    .collect();
            }
            branch.push(h);
        }
        let filters: Vec<Vec<f64>> = branch[0]
            .iter()
            .zip(&branch[1])
            .map(|(re, im)| direct_irdft(re, im))
            .collect();
        let w = p.get(&format!("step{s}.mix.kernel")).unwrap();
        let b = p.get(&format!("step{s}.mix.bias")).unwrap();
        let m = filters.len();
        let taps: Vec<Vec<f64>> = (0..m)
            .map(|o| {
                (0..n)
                    .map(|t| {
                        let z: f64 = (0..m).map(|i| w.data()[o * m + i] * filters[i][t]).sum();
                        (z + b.data()[o]).tanh()
                    })
                    .collect()
            })
            .collect();
        let (c_out, c_in) = cfg.step_channels(s);
        let bank: Vec<Vec<Vec<f64>>> = (0..c_out)
            .map(|o| (0..c_in).map(|i| taps[o * c_in + i].clone()).collect())
            .collect();
        banks.push(bank);
    }

    let mut h = vec![noisy.to_vec()];
    for (i, bank) in banks.iter().enumerate() {
        h = brute_conv(&h, bank);
        if i + 1 < banks.len() {
            for row in &mut h {
                for v in row.iter_mut() {
                    if *v < 0.0 {
                        *v = v.exp_m1();
                    }
                }
            }
        }
    }
    h.remove(0)
}

fn random_inputs(seed: u64, n: usize) -> (Tensor, Tensor, Tensor) {
    let mut r = rng(seed);
    let x = uniform(&mut r, &[n], -1.0, 1.0);
    let noise = uniform(&mut r, &[n], -1.0, 1.0);
    let y = x.zip_map(&noise, |a, b| a + b).unwrap();
    let pn = Tensor::vector(fft::periodogram(noise.data()).unwrap()).unwrap();
    let py = Tensor::vector(fft::periodogram(y.data()).unwrap()).unwrap();
    (y, pn, py)
}

fn three_step(n: usize) -> ModelConfig {
    ModelConfig {
        signal_length: n,
        steps: 3,
        channel_progression: vec![1, 3, 2, 1],
        branch_layers: 3,
        branch_hidden_channels: 4,
        branch_kernel_size: 5,
        epsilon_ratio: 1e-8,
    }
}

#[test]
fn matches_loop_reference() {
    for (i, cfg) in [small_config(32), three_step(16), small_config(64)].iter().enumerate() {
        let params = init_params(cfg, 100 + i as u64);
        let (y, pn, py) = random_inputs(i as u64, cfg.signal_length);
        let got = denoise(cfg, &params, &y, &pn, &py).unwrap();
        let want = reference_forward(cfg, &params, y.data(), pn.data(), py.data());
        let err = max_abs_diff(got.data(), &want);
        assert!(err < 1e-8, "config {i}: max difference {err:e}");
    }
}

#[test]
fn banks_compose_to_the_full_model() {
    let cfg = three_step(32);
    let params = init_params(&cfg, 3);
    let (y, pn, py) = random_inputs(9, 32);
    let bank = filter_banks(&cfg, &params, &pn, &py).unwrap();
    for (s, t) in bank.steps.iter().enumerate() {
        let (o, i) = cfg.step_channels(s + 1);
        assert_eq!(t.shape(), [o, i, 32]);
    }
    let via_bank = apply_filter_bank(&y.reshape(&[1, 32]).unwrap(), &bank).unwrap();
    let full = denoise(&cfg, &params, &y, &pn, &py).unwrap();
    assert_eq!(via_bank.data(), full.data());
}

#[test]
fn zero_parameters_give_zero_output() {
    let cfg = ModelConfig::default();
    let (y, pn, py) = random_inputs(1, cfg.signal_length);
    let out = denoise(&cfg, &ModelParams::zeros(&cfg), &y, &pn, &py).unwrap();
    assert!(out.data().iter().all(|&v| v == 0.0));
}

#[test]
fn output_depends_on_noise_psd() {
    let cfg = small_config(64);
    let params = init_params(&cfg, 8);
    let (y, pn, py) = random_inputs(2, 64);
    let a = denoise(&cfg, &params, &y, &pn, &py).unwrap();
    let b = denoise(&cfg, &params, &y, &pn.scale(4.0), &py).unwrap();
    assert!(max_abs_diff(a.data(), b.data()) > 1e-6);
}

#[test]
fn parameter_count() {
    let cfg = ModelConfig::default();
    let from_layout: usize = param_layout(&cfg).iter().map(|s| s.shape.iter().product::<usize>()).sum();
    assert_eq!(closed_form_param_count(&cfg), 274_800);
    assert_eq!(from_layout, 274_800);
    assert_eq!(init_params(&cfg, 0).count(), 274_800);
}

#[test]
fn weights_round_trip_bitwise() {
    let cfg = ModelConfig::default();
    let params = init_params(&cfg, 77);
    let bytes = encode_weights(&params, &cfg).unwrap();
    let (back, back_cfg) = decode_weights(&bytes).unwrap();
    assert_eq!(back, params);
    assert_eq!(back_cfg, cfg);
    assert_eq!(encode_weights(&back, &back_cfg).unwrap(), bytes);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.ednw");
    save_weights(&params, &cfg, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert_eq!(load_weights(&path).unwrap().0, params);
}

#[test]
fn full_model_gradient_matches_finite_differences() {
    for inst in 0..ops::INSTANCES {
        let report = ops::model_loss_check(inst);
        assert!(report.passed, "instance {inst}: {report:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn taps_stay_in_unit_interval(seed in any::<u64>(), scale in 0.1f64..20.0) {
        let cfg = small_config(32);
        let mut r = rng(seed);
        let entries = param_layout(&cfg)
            .into_iter()
            .map(|s| (s.name.clone(), uniform(&mut r, &s.shape, -scale, scale)))
            .collect();
        let params = ModelParams::from_entries(&cfg, entries).unwrap();
        let (_, pn, py) = random_inputs(seed, 32);
        let bank = filter_banks(&cfg, &params, &pn, &py).unwrap();
        prop_assert!(bank.max_abs_tap() <= 1.0);
    }
}
