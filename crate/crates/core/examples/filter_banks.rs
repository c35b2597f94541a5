//! Looks inside the model: the filter banks the kernel evaluators produce
//! for a given pair of spectra, and the cascade that applies them.
//!
//! ```text
//! cargo run --release --example filter_banks
//! ```

use freqdenoise::data::{generate_synthetic_corpus, make_model_inputs, standardize, synthesize, SnrConvention, SignalKind};
use freqdenoise::model::{apply_filter_bank, denoise, filter_banks, init_params, ModelConfig, ModelParams};
use freqdenoise::tensor::Tensor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ModelConfig::default();
    let params = init_params(&cfg, 5);
    let corpus = generate_synthetic_corpus(1, cfg.signal_length, 5);
    let eeg = corpus.iter().find(|s| s.kind == SignalKind::Eeg).unwrap();
    let emg = corpus.iter().find(|s| s.kind == SignalKind::Emg).unwrap();
    let m = synthesize(eeg, emg, -3.0, SnrConvention::RmsRatio)?;
    let inputs = make_model_inputs(&standardize(&m)?)?;

    let bank = filter_banks(&cfg, &params, &inputs.psd_noise, &inputs.psd_noisy)?;
    for (s, t) in bank.steps.iter().enumerate() {
        println!("step {}: bank {:?}, max |tap| {:.4}", s + 1, t.shape(), t.max_abs());
    }
    println!("all taps within [-1, 1]: {}", bank.max_abs_tap() <= 1.0);

    let direct = apply_filter_bank(&inputs.noisy.reshape(&[1, cfg.signal_length])?, &bank)?;
    let full = denoise(&cfg, &params, &inputs.noisy, &inputs.psd_noise, &inputs.psd_noisy)?;
    let diff = direct
        .data()
        .iter()
        .zip(full.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("explicit cascade vs full model: max difference {diff:.2e}");

    let zero = denoise(&cfg, &ModelParams::zeros(&cfg), &inputs.noisy, &inputs.psd_noise, &inputs.psd_noisy)?;
    println!("zero parameters give zero output: {}", zero == Tensor::zeros(&[cfg.signal_length]));
    Ok(())
}
