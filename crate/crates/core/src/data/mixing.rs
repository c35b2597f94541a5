//! Noisy-signal synthesis `y = x + λ·n` and noisy-signal standardization.

use serde::{Deserialize, Serialize};

use super::{DataError, Segment, SignalKind};
use crate::tensor::{fft, Tensor};

/// How decibels relate to the clean/noise RMS ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    /// `SNR = 10·log10(RMS(x) / RMS(λn))`.
    #[default]
    RmsRatio,
    /// `SNR = 20·log10(RMS(x) / RMS(λn))`, i.e. a power ratio in dB.
    PowerRatio,
}

impl SnrConvention {
    fn factor(self) -> f64 {
        match self {
            SnrConvention::RmsRatio => 10.0,
            SnrConvention::PowerRatio => 20.0,
        }
    }
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Mean and population standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Scale for the noise that puts the mixture at `snr_db`.
pub fn snr_to_lambda(x: &[f64], n: &[f64], snr_db: f64, conv: SnrConvention) -> Result<f64, DataError> {
    let (rx, rn) = (rms(x), rms(n));
    if !(rx > 0.0) {
        return Err(DataError::Degenerate("clean signal has zero energy".into()));
    }
    if !(rn > 0.0) {
        return Err(DataError::Degenerate("noise has zero energy".into()));
    }
    Ok(rx / rn * 10f64.powf(-snr_db / conv.factor()))
}

/// SNR of a clean signal against an already-scaled contaminant.
pub fn measure_snr(x: &[f64], scaled_noise: &[f64], conv: SnrConvention) -> f64 {
    conv.factor() * (rms(x) / rms(scaled_noise)).log10()
}

/// A synthesized training/evaluation example.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyMixture {
    pub x: Tensor,
    /// Unit (unscaled) noise segment.
    pub n: Tensor,
    pub lambda: f64,
    pub snr_db: f64,
    pub y: Tensor,
    pub artifact_kind: SignalKind,
}

impl NoisyMixture {
    /// The contaminant actually present in `y`.
    pub fn scaled_noise(&self) -> Vec<f64> {
        self.n.data().iter().map(|v| self.lambda * v).collect()
    }
}

/// Builds `y = x + λ·n` at the requested SNR.
pub fn synthesize(
    x: &Segment,
    n: &Segment,
    snr_db: f64,
    conv: SnrConvention,
) -> Result<NoisyMixture, DataError> {
    if x.kind != SignalKind::Eeg {
        return Err(DataError::KindMismatch(format!("clean segment is {}", x.kind)));
    }
    if !n.kind.is_artifact() {
        return Err(DataError::KindMismatch("noise segment is eeg".into()));
    }
    if x.len() != n.len() {
        return Err(DataError::Header(format!(
            "clean length {} differs from noise length {}",
            x.len(),
            n.len()
        )));
    }
    let lambda = snr_to_lambda(x.data(), n.data(), snr_db, conv)?;
    let y = x
        .data()
        .iter()
        .zip(n.data())
        .map(|(a, b)| a + lambda * b)
        .collect();
    Ok(NoisyMixture {
        x: x.samples.clone(),
        n: n.samples.clone(),
        lambda,
        snr_db,
        y: Tensor::from_parts_unchecked(y, vec![x.len()]),
        artifact_kind: n.kind,
    })
}

/// Signals shifted and scaled by the noisy signal's statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedExample {
    pub y_hat: Tensor,
    pub x_hat: Tensor,
    /// Standardized scaled noise `(λn − ȳ)/σ_y`.
    pub n_hat: Tensor,
    pub mean_y: f64,
    pub std_y: f64,
}

impl StandardizedExample {
    /// Maps a standardized signal back to the amplitude of `y`.
    pub fn destandardize(&self, s: &[f64]) -> Vec<f64> {
        s.iter().map(|v| v * self.std_y + self.mean_y).collect()
    }
}

/// Standardizes `y`, `x` and `λn` with the mean and population standard
/// deviation of `y`.
pub fn standardize(m: &NoisyMixture) -> Result<StandardizedExample, DataError> {
    let (mean_y, std_y) = mean_std(m.y.data());
    if !(std_y > 0.0) {
        return Err(DataError::Degenerate("noisy signal has zero variance".into()));
    }
    let z = |v: f64| (v - mean_y) / std_y;
    let len = m.y.len();
    let make = |values: Vec<f64>| Tensor::from_parts_unchecked(values, vec![len]);
    Ok(StandardizedExample {
        y_hat: make(m.y.data().iter().map(|&v| z(v)).collect()),
        x_hat: make(m.x.data().iter().map(|&v| z(v)).collect()),
        n_hat: make(m.n.data().iter().map(|&v| z(m.lambda * v)).collect()),
        mean_y,
        std_y,
    })
}

/// Standardizes a lone noisy signal, as at inference time.
pub fn standardize_signal(y: &[f64]) -> Result<(Vec<f64>, f64, f64), DataError> {
    let (mean, std) = mean_std(y);
    if !(std > 0.0) {
        return Err(DataError::Degenerate("noisy signal has zero variance".into()));
    }
    Ok((y.iter().map(|v| (v - mean) / std).collect(), mean, std))
}

/// Model inputs for one example.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInputs {
    pub noisy: Tensor,
    pub psd_noise: Tensor,
    pub psd_noisy: Tensor,
}

/// Periodograms of the standardized noise and noisy signals alongside the
/// standardized noisy signal.
pub fn make_model_inputs(e: &StandardizedExample) -> Result<ModelInputs, DataError> {
    let psd = |t: &Tensor| -> Result<Tensor, DataError> {
        let p = fft::periodogram(t.data()).map_err(|e| DataError::Header(e.to_string()))?;
        let f = p.len();
        Ok(Tensor::from_parts_unchecked(p, vec![f]))
    };
    Ok(ModelInputs {
        noisy: e.y_hat.clone(),
        psd_noise: psd(&e.n_hat)?,
        psd_noisy: psd(&e.y_hat)?,
    })
}
