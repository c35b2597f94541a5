//! Mixes clean EEG with an artifact at a target SNR, then standardizes the
//! result the way the model sees it.
//!
//! ```text
//! cargo run --example noisy_mixture
//! ```

use freqdenoise::data::{
    generate_synthetic_corpus, make_model_inputs, mean_std, measure_snr, standardize, synthesize,
    SignalKind, SnrConvention,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = generate_synthetic_corpus(1, 512, 21);
    let clean = corpus.iter().find(|s| s.kind == SignalKind::Eeg).unwrap();
    for kind in [SignalKind::Eog, SignalKind::Emg] {
        let noise = corpus.iter().find(|s| s.kind == kind).unwrap();
        for snr in [-7.0, -2.0, 4.0] {
            let m = synthesize(clean, noise, snr, SnrConvention::RmsRatio)?;
            let measured = measure_snr(m.x.data(), &m.scaled_noise(), SnrConvention::RmsRatio);
            let s = standardize(&m)?;
            let (mu, sd) = mean_std(s.y_hat.data());
            let restored = s.destandardize(s.y_hat.data());
            let inv_err = restored
                .iter()
                .zip(m.y.data())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            println!(
                "{kind} target {snr:>5.1} dB: lambda {:.4}, measured {measured:>8.4} dB, \
                 y_hat mean {mu:.1e} std {sd:.6}, inversion error {inv_err:.1e}",
                m.lambda
            );
        }
    }

    let m = synthesize(clean, &corpus[1], 0.0, SnrConvention::RmsRatio)?;
    let inputs = make_model_inputs(&standardize(&m)?)?;
    println!(
        "model inputs: noisy {:?}, noise psd {:?}, noisy psd {:?}",
        inputs.noisy.shape(),
        inputs.psd_noise.shape(),
        inputs.psd_noisy.shape()
    );
    Ok(())
}
