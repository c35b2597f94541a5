//! Runs the `synth`, `train`, `eval` and `denoise` commands in-process on a
//! small config, the same way the `freqdenoise` binary does.
//!
//! ```text
//! cargo run --release --example denoise_file
//! ```

use freqdenoise::cli::main_with_args;
use freqdenoise::data::{generate_synthetic_corpus, make_model_inputs, save_segments, standardize, synthesize, SegmentFormat, SignalKind, SnrConvention, Segment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("freqdenoise-denoise-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.json");
    std::fs::write(
        &config,
        r#"{
  "seed": 2,
  "signal_length": 128,
  "model": {"steps": 2, "channel_progression": [1, 4, 1], "branch_layers": 2,
            "branch_hidden_channels": 8, "branch_kernel_size": 5},
  "train": {"epochs": 4, "batch_size": 8, "steps_per_epoch": 4, "test_examples": 8},
  "data": {"synthetic_count": 24},
  "eval": {"per_level_count": 4}
}
"#,
    )?;
    let s = |p: &std::path::Path| p.to_string_lossy().into_owned();
    let code = main_with_args(["freqdenoise", "train", "--config", &s(&config)]);
    assert_eq!(code, 0);
    let weights = dir.join("run/weights.ednw");
    let code = main_with_args([
        "freqdenoise", "eval", "--weights", &s(&weights), "--config", &s(&config), "--artifact", "both",
    ]);
    assert_eq!(code, 0);

    // noisy recordings plus the PSD of their (standardized) contamination
    let corpus = generate_synthetic_corpus(4, 128, 99);
    let eeg: Vec<&Segment> = corpus.iter().filter(|s| s.kind == SignalKind::Eeg).collect();
    let eog: Vec<&Segment> = corpus.iter().filter(|s| s.kind == SignalKind::Eog).collect();
    let mut noisy = Vec::new();
    let mut psd_rows = String::new();
    for (x, n) in eeg.iter().zip(&eog) {
        let m = synthesize(x, n, -3.0, SnrConvention::RmsRatio)?;
        let inputs = make_model_inputs(&standardize(&m)?)?;
        let row: Vec<String> = inputs.psd_noise.data().iter().map(f64::to_string).collect();
        psd_rows.push_str(&row.join(","));
        psd_rows.push('\n');
        noisy.push(Segment::new(m.y.clone(), SignalKind::Eeg, x.source_id.clone()));
    }
    let input = dir.join("noisy.ednb");
    let psd = dir.join("noise_psd.csv");
    save_segments(&input, SegmentFormat::Ednb, &noisy)?;
    std::fs::write(&psd, psd_rows)?;

    let code = main_with_args([
        "freqdenoise", "denoise", "--weights", &s(&weights), "--in", &s(&input),
        "--noise-psd", &s(&psd), "--out", &s(&dir.join("denoised.ednb")),
        "--trace-dir", &s(&dir.join("traces")),
    ]);
    assert_eq!(code, 0);
    println!("outputs in {}", dir.display());
    Ok(())
}
