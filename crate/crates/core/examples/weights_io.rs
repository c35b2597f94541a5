//! Saves and reloads weights and a training checkpoint, checking that both
//! round-trip bit for bit.
//!
//! ```text
//! cargo run --example weights_io
//! ```

use freqdenoise::data::generate_synthetic_corpus;
use freqdenoise::model::weights::{decode_weights, encode_weights};
use freqdenoise::model::{closed_form_param_count, init_params, ModelConfig};
use freqdenoise::training::{decode_checkpoint, encode_checkpoint, TrainConfig, Trainer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ModelConfig::default();
    let params = init_params(&cfg, 42);
    println!(
        "default model: {} parameters (closed form {})",
        params.count(),
        closed_form_param_count(&cfg)
    );
    let bytes = encode_weights(&params, &cfg)?;
    let (back, back_cfg) = decode_weights(&bytes)?;
    println!(
        "EDNW: {} bytes, params equal {}, config equal {}, re-encoding identical {}",
        bytes.len(),
        back == params,
        back_cfg == cfg,
        encode_weights(&back, &back_cfg)? == bytes
    );

    let small = ModelConfig {
        signal_length: 64,
        steps: 2,
        channel_progression: vec![1, 2, 1],
        branch_layers: 2,
        branch_hidden_channels: 4,
        branch_kernel_size: 3,
        epsilon_ratio: 1e-8,
    };
    let segs = generate_synthetic_corpus(6, 64, 0);
    let tc = TrainConfig {
        epochs: 2,
        batch_size: 4,
        steps_per_epoch: Some(3),
        test_examples: 4,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(small, tc, 0, &segs, &segs)?;
    trainer.run_until(2, |_, _| Ok(()))?;
    let ck = trainer.checkpoint();
    let bytes = encode_checkpoint(&ck)?;
    let back = decode_checkpoint(&bytes)?;
    println!(
        "checkpoint: {} bytes after epoch {}, optimizer step {}, state equal {}, re-encoding identical {}",
        bytes.len(),
        back.epoch,
        back.optimizer.t,
        back == ck,
        encode_checkpoint(&back)? == bytes
    );
    Ok(())
}
