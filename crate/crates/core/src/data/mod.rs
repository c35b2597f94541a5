//! Segments, partitioning, noisy-signal synthesis and standardization.

pub mod io;
mod mixing;
mod segment;
pub mod synthetic;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use io::{load_segments, save_segments, LoadOptions, SegmentFormat};
pub use mixing::{
    make_model_inputs, mean_std, measure_snr, rms, snr_to_lambda, standardize, standardize_signal,
    synthesize, ModelInputs, NoisyMixture, SnrConvention, StandardizedExample,
};
pub use segment::{Segment, SignalKind};
pub use synthetic::generate_synthetic_corpus;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, expected EDNB")]
    BadMagic,
    #[error("unsupported segment file version {0}")]
    UnsupportedVersion(u32),
    #[error("bad header: {0}")]
    Header(String),
    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("record {record}: non-finite value at sample {index}")]
    NonFinite { record: usize, index: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("signal kind mismatch: {0}")]
    KindMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Independent ChaCha stream for a `(seed, tag...)` tuple.
///
/// Hashing the tuple gives every batch element its own stream, so results
/// do not depend on the order or thread in which elements are synthesized.
pub fn derive_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Seeded shuffle, then the first `⌊fraction·total⌋` segments go to the
/// training side and the rest to the test side.
pub fn split(
    segments: &[Segment],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<Segment>, Vec<Segment>), DataError> {
    if segments.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * segments.len() as f64).floor() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| segments[i].clone()).collect();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Splits each kind separately so every kind keeps the requested fraction.
pub fn split_by_kind(
    segments: &[Segment],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<Segment>, Vec<Segment>), DataError> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for kind in [SignalKind::Eeg, SignalKind::Eog, SignalKind::Emg] {
        let of_kind: Vec<Segment> = segments.iter().filter(|s| s.kind == kind).cloned().collect();
        if of_kind.is_empty() {
            continue;
        }
        let (a, b) = split(&of_kind, train_fraction, seed ^ kind.code() as u64)?;
        train.extend(a);
        test.extend(b);
    }
    if train.is_empty() && test.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    Ok((train, test))
}

/// Segments grouped by kind.
#[derive(Debug, Clone, Default)]
pub struct SegmentPools {
    pub eeg: Vec<Segment>,
    pub eog: Vec<Segment>,
    pub emg: Vec<Segment>,
}

impl SegmentPools {
    pub fn from_segments(segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut p = Self::default();
        for s in segments {
            match s.kind {
                SignalKind::Eeg => p.eeg.push(s),
                SignalKind::Eog => p.eog.push(s),
                SignalKind::Emg => p.emg.push(s),
            }
        }
        p
    }

    pub fn noise(&self, kind: SignalKind) -> &[Segment] {
        match kind {
            SignalKind::Eog => &self.eog,
            SignalKind::Emg => &self.emg,
            SignalKind::Eeg => &[],
        }
    }

    /// Artifact kinds with at least one segment, EOG first.
    pub fn artifact_kinds(&self) -> Vec<SignalKind> {
        [SignalKind::Eog, SignalKind::Emg]
            .into_iter()
            .filter(|&k| !self.noise(k).is_empty())
            .collect()
    }

    /// Draws a random clean segment, a random noise segment of `kind`, and
    /// an SNR uniform in `[lo, hi]`.
    pub fn draw_mixture(
        &self,
        kind: SignalKind,
        snr_range: (f64, f64),
        conv: SnrConvention,
        rng: &mut impl Rng,
    ) -> Result<NoisyMixture, DataError> {
        let noise = self.noise(kind);
        if self.eeg.is_empty() || noise.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        let x = &self.eeg[rng.random_range(0..self.eeg.len())];
        let n = &noise[rng.random_range(0..noise.len())];
        let snr = if snr_range.1 > snr_range.0 {
            rng.random_range(snr_range.0..=snr_range.1)
        } else {
            snr_range.0
        };
        synthesize(x, n, snr, conv)
    }
}
