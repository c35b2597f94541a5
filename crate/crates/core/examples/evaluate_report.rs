//! Produces the per-SNR report and the benchmark comparison table for a
//! briefly trained small model.
//!
//! ```text
//! cargo run --release --example evaluate_report
//! ```

use freqdenoise::data::{generate_synthetic_corpus, split_by_kind, SignalKind};
use freqdenoise::metrics::{
    comparison_csv, evaluate, evaluate_method, report_csv, EvalConfig, Method,
};
use freqdenoise::model::ModelConfig;
use freqdenoise::training::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelConfig {
        signal_length: 256,
        steps: 2,
        channel_progression: vec![1, 4, 1],
        branch_layers: 2,
        branch_hidden_channels: 8,
        branch_kernel_size: 7,
        epsilon_ratio: 1e-8,
    };
    let corpus = generate_synthetic_corpus(32, model.signal_length, 1);
    let (train_set, test_set) = split_by_kind(&corpus, 0.6, 1)?;
    let config = TrainConfig {
        epochs: 10,
        batch_size: 8,
        steps_per_epoch: Some(5),
        test_examples: 16,
        ..TrainConfig::default()
    };
    let out = train(model.clone(), config, 1, &train_set, &test_set, 1, None)?;

    let eeg: Vec<_> = test_set.iter().filter(|s| s.kind == SignalKind::Eeg).cloned().collect();
    let eval = EvalConfig {
        per_level_count: 5,
        ..EvalConfig::default()
    };
    for kind in [SignalKind::Emg, SignalKind::Eog] {
        let report = evaluate(&out.params, &model, &eeg, &test_set, kind, &eval, 9, 1)?;
        let baselines = [Method::Identity, Method::OracleSpectral]
            .into_iter()
            .map(|m| evaluate_method(m, &eeg, &test_set, kind, &eval, 9, 1))
            .collect::<Result<Vec<_>, _>>()?;
        println!("{}", report_csv(&report));
        println!("{}", comparison_csv(&report, &baselines));
    }
    Ok(())
}
