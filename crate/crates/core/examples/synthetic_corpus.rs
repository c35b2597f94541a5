//! Generates the synthetic EEG/EOG/EMG corpus, writes it as EDNB and CSV,
//! and reads it back.
//!
//! ```text
//! cargo run --example synthetic_corpus -- /tmp/corpus
//! ```

use std::path::PathBuf;

use freqdenoise::data::{
    generate_synthetic_corpus, load_segments, save_segments, split_by_kind, LoadOptions,
    SegmentFormat, SignalKind,
};
use freqdenoise::tensor::fft;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("freqdenoise-corpus"));
    std::fs::create_dir_all(&dir)?;

    let corpus = generate_synthetic_corpus(16, 512, 0);
    let (train, test) = split_by_kind(&corpus, 0.6, 0)?;
    println!("{} segments: {} train / {} test", corpus.len(), train.len(), test.len());

    for kind in [SignalKind::Eeg, SignalKind::Eog, SignalKind::Emg] {
        let segs: Vec<_> = corpus.iter().filter(|s| s.kind == kind).cloned().collect();
        // where the power sits: fraction below 4 Hz and above 20 Hz (2 bins per Hz at N=512)
        let (mut low, mut high, mut total) = (0.0, 0.0, 0.0);
        for s in &segs {
            for (k, p) in fft::periodogram(s.data())?.iter().enumerate() {
                total += p;
                if k < 8 {
                    low += p;
                } else if k > 40 {
                    high += p;
                }
            }
        }
        println!("{kind}: power below 4 Hz {:.2}, above 20 Hz {:.2}", low / total, high / total);

        let ednb = dir.join(format!("{kind}.ednb"));
        let csv = dir.join(format!("{kind}.csv"));
        save_segments(&ednb, SegmentFormat::Ednb, &segs)?;
        save_segments(&csv, SegmentFormat::Csv, &segs)?;
        let opts = LoadOptions { signal_length: 512, kind: Some(kind) };
        let a = load_segments(&ednb, SegmentFormat::Ednb, &opts)?;
        let b = load_segments(&csv, SegmentFormat::Csv, &opts)?;
        println!("  wrote {} and {}, read back {} + {} segments", ednb.display(), csv.display(), a.len(), b.len());
    }
    Ok(())
}
