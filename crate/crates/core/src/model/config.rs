use serde::{Deserialize, Serialize};

use crate::tensor::fft::half_len;

/// Architecture hyperparameters of the denoiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Samples per segment; a power of two.
    pub signal_length: usize,
    /// Number of convolution steps in the filter cascade.
    pub steps: usize,
    /// Channel count after each step, starting with the input channel;
    /// length `steps + 1`, first and last entries 1.
    pub channel_progression: Vec<usize>,
    /// Convolution layers per kernel-evaluator branch.
    pub branch_layers: usize,
    pub branch_hidden_channels: usize,
    /// Kernel size of the branch convolutions along the frequency axis; odd.
    pub branch_kernel_size: usize,
    /// Added to the noise PSD before forming the noisy/noise ratio channel.
    pub epsilon_ratio: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            signal_length: 512,
            steps: 3,
            channel_progression: vec![1, 8, 8, 1],
            branch_layers: 4,
            branch_hidden_channels: 32,
            branch_kernel_size: 15,
            epsilon_ratio: 1e-8,
        }
    }
}

impl ModelConfig {
    /// Half-spectrum bins fed to the kernel evaluators.
    pub fn spectrum_len(&self) -> usize {
        half_len(self.signal_length)
    }

    /// `(C_s, C_{s-1})` for step `s` in `1..=steps`.
    pub fn step_channels(&self, step: usize) -> (usize, usize) {
        (
            self.channel_progression[step],
            self.channel_progression[step - 1],
        )
    }

    /// Filters emitted by the kernel evaluator of step `s`: `C_s · C_{s-1}`.
    pub fn step_filters(&self, step: usize) -> usize {
        let (out, inp) = self.step_channels(step);
        out * inp
    }

    /// Frequency receptive field of one branch, in bins.
    pub fn receptive_field(&self) -> usize {
        self.branch_layers * (self.branch_kernel_size - 1) + 1
    }

    /// Every violated constraint, each prefixed with the offending field.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let n = self.signal_length;
        if !(n >= 4 && n.is_power_of_two()) {
            v.push(format!("signal_length: {n} is not a power of two >= 4"));
        }
        if self.steps == 0 {
            v.push("steps: must be at least 1".into());
        }
        if self.channel_progression.len() != self.steps + 1 {
            v.push(format!(
                "channel_progression: length {} must equal steps + 1 = {}",
                self.channel_progression.len(),
                self.steps + 1
            ));
        } else {
            if self.channel_progression.first() != Some(&1)
                || self.channel_progression.last() != Some(&1)
            {
                v.push("channel_progression: first and last entries must be 1".into());
            }
            if self.channel_progression.contains(&0) {
                v.push("channel_progression: channel counts must be positive".into());
            }
        }
        if self.branch_layers < 2 {
            v.push("branch_layers: must be at least 2".into());
        }
        if self.branch_hidden_channels == 0 {
            v.push("branch_hidden_channels: must be positive".into());
        }
        let k = self.branch_kernel_size;
        if k.is_multiple_of(2) {
            v.push(format!("branch_kernel_size: {k} must be odd"));
        } else if n >= 4 && k > 2 * half_len(n) - 1 {
            v.push(format!(
                "branch_kernel_size: {k} exceeds 2F-1 for F = {}",
                half_len(n)
            ));
        }
        if !(self.epsilon_ratio > 0.0 && self.epsilon_ratio.is_finite()) {
            v.push("epsilon_ratio: must be finite and > 0".into());
        }
        v
    }

    pub fn validate(&self) -> Result<(), super::ModelError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(super::ModelError::InvalidConfig(v))
        }
    }
}
