//! Synthetic stand-ins for clean EEG, ocular and muscular recordings.
//!
//! Every generator builds a periodic signal (spectral content on exact DFT
//! bins, pulses kept away from the segment edges) so the rectangular
//! periodogram sees no leakage, then removes the mean and normalizes to unit
//! RMS. Frequencies assume the 256 Hz sampling rate of the benchmark data.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{derive_rng, Segment, SignalKind};
use crate::tensor::{fft, Tensor};

pub const SAMPLE_RATE_HZ: f64 = 256.0;

/// Sets `re/im` of every bin whose frequency lies in `[lo, hi]` Hz to a
/// complex Gaussian scaled by `amplitude(f)`, then inverse-transforms.
fn band_noise(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: f64,
    hi: f64,
    amplitude: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let f = fft::half_len(n);
    let df = SAMPLE_RATE_HZ / n as f64;
    let mut re = vec![0.0; f];
    let mut im = vec![0.0; f];
    for k in 1..f {
        let freq = k as f64 * df;
        if freq < lo || freq > hi {
            continue;
        }
        let a = amplitude(freq);
        re[k] = a * rng.sample::<f64, _>(StandardNormal);
        im[k] = a * rng.sample::<f64, _>(StandardNormal);
    }
    fft::irfft(&re, &im).expect("power-of-two length")
}

fn normalize(mut x: Vec<f64>) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v /= rms);
    }
    x
}

/// Background activity with a `1/f` power spectrum between 1 and 80 Hz.
pub fn eeg_like(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    normalize(band_noise(rng, n, 1.0, 80.0, |f| 1.0 / f.sqrt()))
}

/// Smooth blink-like Gaussian pulses over a slow 0.5–3 Hz drift.
pub fn eog_like(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let drift = band_noise(rng, n, 0.5, 3.0, |_| 1.0);
    let drift_rms = (drift.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt().max(1e-12);
    let mut x: Vec<f64> = drift.iter().map(|v| 0.5 * v / drift_rms).collect();
    let pulses = rng.random_range(1..=3);
    for _ in 0..pulses {
        let width = rng.random_range(0.08..0.2) * SAMPLE_RATE_HZ;
        let margin = 4.0 * width;
        let center = if n as f64 > 2.0 * margin {
            rng.random_range(margin..n as f64 - margin)
        } else {
            n as f64 / 2.0
        };
        let amp = rng.random_range(1.0..3.0) * if rng.random_bool(0.8) { 1.0 } else { -1.0 };
        for (t, v) in x.iter_mut().enumerate() {
            let z = (t as f64 - center) / width;
            *v += amp * (-0.5 * z * z).exp();
        }
    }
    normalize(x)
}

/// Broadband 20–128 Hz activity gated by a few smooth bursts.
pub fn emg_like(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let carrier = band_noise(rng, n, 20.0, SAMPLE_RATE_HZ / 2.0, |_| 1.0);
    let mut envelope = vec![0.3; n];
    let bursts = rng.random_range(1..=3);
    for _ in 0..bursts {
        let width = rng.random_range(0.1..0.3) * SAMPLE_RATE_HZ;
        let center = rng.random_range(0.0..n as f64);
        let amp = rng.random_range(0.5..2.0);
        for (t, e) in envelope.iter_mut().enumerate() {
            // circular distance keeps the envelope periodic
            let d = (t as f64 - center).abs();
            let d = d.min(n as f64 - d) / width;
            *e += amp * (-0.5 * d * d).exp();
        }
    }
    normalize(carrier.iter().zip(&envelope).map(|(c, e)| c * e).collect())
}

/// `count` segments of each kind, deterministic in `seed`.
pub fn generate_synthetic_corpus(count: usize, signal_length: usize, seed: u64) -> Vec<Segment> {
    let mut out = Vec::with_capacity(3 * count);
    for kind in [SignalKind::Eeg, SignalKind::Eog, SignalKind::Emg] {
        for i in 0..count {
            let mut rng = derive_rng(seed, &[0x5157, kind.code() as u64, i as u64]);
            let samples = match kind {
                SignalKind::Eeg => eeg_like(&mut rng, signal_length),
                SignalKind::Eog => eog_like(&mut rng, signal_length),
                SignalKind::Emg => emg_like(&mut rng, signal_length),
            };
            out.push(Segment::new(
                Tensor::vector(samples).expect("finite synthetic samples"),
                kind,
                format!("synthetic-{kind}-{i}"),
            ));
        }
    }
    out
}
