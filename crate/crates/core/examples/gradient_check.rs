//! Compares reverse-mode gradients with central finite differences, first
//! for a single operation and then for the whole model plus loss.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use freqdenoise::data::{generate_synthetic_corpus, make_model_inputs, standardize, synthesize, SnrConvention};
use freqdenoise::model::{forward, init_params, ModelConfig, ParamVars};
use freqdenoise::tensor::{grad_check, Tensor};
use freqdenoise::training::{loss, LossWeights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = Tensor::new((0..12).map(|i| (i as f64 * 0.37).sin()).collect(), vec![2, 6])?;
    let k = Tensor::new((0..12).map(|i| (i as f64 * 0.11).cos()).collect(), vec![3, 2, 2])?;
    let report = grad_check(|g, v| g.conv1d_same(v[0], v[1]), &[x, k], 1e-6)?;
    println!(
        "conv1d_same: max rel error {:.2e} over {} coordinates",
        report.max_rel_error, report.coordinates
    );

    let cfg = ModelConfig {
        signal_length: 64,
        steps: 2,
        channel_progression: vec![1, 2, 1],
        branch_layers: 2,
        branch_hidden_channels: 3,
        branch_kernel_size: 3,
        epsilon_ratio: 1e-8,
    };
    let segs = generate_synthetic_corpus(1, cfg.signal_length, 4);
    let m = synthesize(&segs[0], &segs[1], -2.0, SnrConvention::RmsRatio)?;
    let ex = standardize(&m)?;
    let inputs = make_model_inputs(&ex)?;
    let params = init_params(&cfg, 11);
    let tensors: Vec<Tensor> = params.tensors().cloned().collect();

    let report = grad_check(
        |g, vars| {
            let pv = ParamVars::from_vars(vars.to_vec());
            let pass = forward(g, &cfg, &pv, &inputs.noisy, &inputs.psd_noise, &inputs.psd_noisy)
                .map_err(|e| freqdenoise::tensor::TensorError::InvalidGraph(e.to_string()))?;
            loss(g, &ex.x_hat, pass.output, &LossWeights::default())
                .map_err(|e| freqdenoise::tensor::TensorError::InvalidGraph(e.to_string()))
        },
        &tensors,
        1e-6,
    )?;
    println!(
        "model + loss: max rel error {:.2e}, max abs error {:.2e} over {} parameters, passed = {}",
        report.max_rel_error, report.max_abs_error, report.coordinates, report.passed
    );
    Ok(())
}
