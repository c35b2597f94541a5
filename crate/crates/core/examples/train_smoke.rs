//! Desk-scale training run on the synthetic corpus, then a comparison with
//! the identity and oracle spectral-gain baselines.
//!
//! ```text
//! cargo run --release --example train_smoke -- [epochs] [batch_size] [threads]
//! ```
//!
//! Defaults: 60 epochs × 5 steps with batch 8, i.e. 300 optimizer steps.

use freqdenoise::data::{generate_synthetic_corpus, split_by_kind, SignalKind};
use freqdenoise::metrics::{evaluate_method, EvalConfig, Method};
use freqdenoise::model::ModelConfig;
use freqdenoise::training::{TrainConfig, Trainer};

fn arg(i: usize, default: usize) -> usize {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (epochs, batch, threads) = (arg(1, 60), arg(2, 8), arg(3, 1));
    let seed = 7;
    let corpus = generate_synthetic_corpus(64, 512, seed);
    let (train, test) = split_by_kind(&corpus, 0.6, seed)?;

    let model = ModelConfig::default();
    let config = TrainConfig {
        epochs,
        batch_size: batch,
        steps_per_epoch: Some(5),
        test_examples: 32,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(model.clone(), config, seed, &train, &test)?;
    trainer.set_threads(threads)?;
    trainer.run_until(epochs, |_, r| {
        if r.epoch == 1 || r.epoch % 10 == 0 {
            println!(
                "epoch {:>3}  train {:>9.4}  test {:>9.4}  ({:.1}s)",
                r.epoch, r.train_loss, r.test_loss, r.seconds
            );
        }
        Ok(())
    })?;

    let eeg: Vec<_> = test.iter().filter(|s| s.kind == SignalKind::Eeg).cloned().collect();
    let eval = EvalConfig {
        per_level_count: 10,
        ..EvalConfig::default()
    };
    println!("\nsummary over -7..2 dB    rrmse_t  rrmse_f       cc");
    for kind in [SignalKind::Eog, SignalKind::Emg] {
        for method in [
            Method::Model { cfg: &model, params: trainer.params() },
            Method::Identity,
            Method::OracleSpectral,
        ] {
            let r = evaluate_method(method, &eeg, &test, kind, &eval, seed, threads)?;
            let s = &r.summary;
            println!(
                "{kind} {:<18} {:>8.4} {:>8.4} {:>8.4}",
                r.method, s.rrmse_t, s.rrmse_f, s.cc
            );
        }
    }
    Ok(())
}
