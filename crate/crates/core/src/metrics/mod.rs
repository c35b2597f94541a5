//! Error measures, SNR-grid evaluation and the comparison baselines.

mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    derive_rng, make_model_inputs, standardize, DataError, ModelInputs, Segment, SegmentPools,
    SignalKind, SnrConvention,
};
use crate::model::{denoise, ModelConfig, ModelError, ModelParams};
use crate::tensor::{fft, Tensor, TensorError};

pub use report::{
    comparison_csv, reference_rows, report_csv, report_json, ComparisonRow, ReferenceRow, RowSource,
};

const EVAL_TAG: u64 = 0x6576_616c;

/// Floor added to the noisy PSD in the spectral-gain baseline.
pub const ORACLE_GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid evaluation settings: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

type Result<T> = std::result::Result<T, MetricsError>;

fn same_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(MetricsError::DegenerateInput("empty signals".into()));
    }
    Ok(())
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rmse(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    Ok((sq_dist(x, y) / x.len() as f64).sqrt())
}

/// `sqrt(Σ(x − y)² / Σx²)`.
pub fn rrmse_t(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    let e: f64 = x.iter().map(|v| v * v).sum();
    if !(e > 0.0) {
        return Err(MetricsError::DegenerateTarget("ground truth has zero energy".into()));
    }
    Ok((sq_dist(x, y) / e).sqrt())
}

/// RRMSE between periodograms.
pub fn rrmse_f(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    let px = fft::periodogram(x)?;
    let py = fft::periodogram(y)?;
    let e: f64 = px.iter().map(|v| v * v).sum();
    if !(e > 0.0) {
        return Err(MetricsError::DegenerateTarget("ground truth PSD has zero energy".into()));
    }
    Ok((sq_dist(&px, &py) / e).sqrt())
}

/// Pearson correlation coefficient.
pub fn cc(x: &[f64], y: &[f64]) -> Result<f64> {
    same_len(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(MetricsError::DegenerateInput("zero-variance signal".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn baseline_identity(y_hat: &Tensor) -> Tensor {
    y_hat.clone()
}

/// Spectral subtraction with the true noise PSD: every bin of `ŷ`'s
/// half-spectrum is scaled by `max(0, 1 − P_n/(P_y + ε))`.
pub fn baseline_oracle_spectral(
    y_hat: &Tensor,
    psd_noise: &Tensor,
    psd_noisy: &Tensor,
) -> Result<Tensor> {
    let (mut re, mut im) = fft::rfft(y_hat.data())?;
    if psd_noise.len() != re.len() || psd_noisy.len() != re.len() {
        return Err(MetricsError::LengthMismatch {
            left: re.len(),
            right: psd_noise.len().min(psd_noisy.len()),
        });
    }
    for k in 0..re.len() {
        let gain = (1.0 - psd_noise.data()[k] / (psd_noisy.data()[k] + ORACLE_GAIN_EPSILON)).max(0.0);
        re[k] *= gain;
        im[k] *= gain;
    }
    Ok(Tensor::vector(fft::irfft(&re, &im)?)?)
}

/// What produces the denoised signal in an evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Method<'a> {
    Model {
        cfg: &'a ModelConfig,
        params: &'a ModelParams,
    },
    Identity,
    OracleSpectral,
}

impl Method<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Model { .. } => "model",
            Method::Identity => "identity",
            Method::OracleSpectral => "oracle_spectral",
        }
    }

    pub fn apply(&self, inputs: &ModelInputs) -> Result<Tensor> {
        let ModelInputs {
            noisy,
            psd_noise,
            psd_noisy,
        } = inputs;
        match self {
            Method::Model { cfg, params } => Ok(denoise(cfg, params, noisy, psd_noise, psd_noisy)?),
            Method::Identity => Ok(baseline_identity(noisy)),
            Method::OracleSpectral => baseline_oracle_spectral(noisy, psd_noise, psd_noisy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub snr_grid: Vec<f64>,
    pub per_level_count: usize,
    pub snr_convention: SnrConvention,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            snr_grid: (-7..=2).map(f64::from).collect(),
            per_level_count: 20,
            snr_convention: SnrConvention::default(),
        }
    }
}

impl EvalConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|s| !s.is_finite()) {
            v.push("snr_grid: need at least one finite level".into());
        }
        if self.per_level_count == 0 {
            v.push("per_level_count: must be at least 1".into());
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub rrmse_t: f64,
    pub rrmse_f: f64,
    pub cc: f64,
}

impl Scores {
    pub fn compute(x_hat: &[f64], pred: &[f64]) -> Result<Self> {
        Ok(Self {
            rrmse_t: rrmse_t(x_hat, pred)?,
            rrmse_f: rrmse_f(x_hat, pred)?,
            cc: cc(x_hat, pred)?,
        })
    }

    fn mean(all: &[Scores]) -> Self {
        let n = all.len() as f64;
        Self {
            rrmse_t: all.iter().map(|s| s.rrmse_t).sum::<f64>() / n,
            rrmse_f: all.iter().map(|s| s.rrmse_f).sum::<f64>() / n,
            cc: all.iter().map(|s| s.cc).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub snr_db: f64,
    pub rrmse_t: f64,
    pub rrmse_f: f64,
    pub cc: f64,
    pub n_examples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub artifact_kind: SignalKind,
    pub method: String,
    pub rows: Vec<ReportRow>,
    /// Mean over every example, which is the mean of the rows when the
    /// levels hold equal counts.
    pub summary: ReportRow,
}

/// Scores `method` on mixtures of `eeg_test` with `noise_test` segments of
/// `kind`, `per_level_count` per SNR level. Draws depend on
/// `(seed, kind, level, index)` only, so every method sees the same
/// mixtures.
pub fn evaluate_method(
    method: Method<'_>,
    eeg_test: &[Segment],
    noise_test: &[Segment],
    kind: SignalKind,
    eval: &EvalConfig,
    seed: u64,
    threads: usize,
) -> Result<MetricsReport> {
    let v = eval.violations();
    if !v.is_empty() {
        return Err(MetricsError::InvalidArgument(v.join("; ")));
    }
    if !kind.is_artifact() {
        return Err(MetricsError::InvalidArgument("artifact kind must be eog or emg".into()));
    }
    let pools = SegmentPools::from_segments(
        eeg_test
            .iter()
            .cloned()
            .chain(noise_test.iter().filter(|s| s.kind == kind).cloned()),
    );
    if pools.eeg.is_empty() || pools.noise(kind).is_empty() {
        return Err(DataError::EmptyDataset.into());
    }
    let per = eval.per_level_count;
    let job = |j: usize| -> Result<Scores> {
        let (level, i) = (j / per, j % per);
        let snr = eval.snr_grid[level];
        let mut rng = derive_rng(seed, &[EVAL_TAG, kind.code() as u64, level as u64, i as u64]);
        let m = pools.draw_mixture(kind, (snr, snr), eval.snr_convention, &mut rng)?;
        let s = standardize(&m)?;
        let inputs = make_model_inputs(&s)?;
        let pred = method.apply(&inputs)?;
        Scores::compute(s.x_hat.data(), pred.data())
    };
    let total = eval.snr_grid.len() * per;
    let scores: Vec<Scores> = if threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| MetricsError::InvalidArgument(e.to_string()))?
            .install(|| (0..total).into_par_iter().map(job).collect::<Result<_>>())?
    } else {
        (0..total).map(job).collect::<Result<_>>()?
    };
    let row = |snr_db: f64, s: Scores, n: usize| ReportRow {
        snr_db,
        rrmse_t: s.rrmse_t,
        rrmse_f: s.rrmse_f,
        cc: s.cc,
        n_examples: n,
    };
    let rows = eval
        .snr_grid
        .iter()
        .enumerate()
        .map(|(l, &snr)| row(snr, Scores::mean(&scores[l * per..(l + 1) * per]), per))
        .collect();
    let grid_mean = eval.snr_grid.iter().sum::<f64>() / eval.snr_grid.len() as f64;
    Ok(MetricsReport {
        artifact_kind: kind,
        method: method.name().into(),
        rows,
        summary: row(grid_mean, Scores::mean(&scores), total),
    })
}

/// Evaluates trained parameters.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    params: &ModelParams,
    cfg: &ModelConfig,
    eeg_test: &[Segment],
    noise_test: &[Segment],
    kind: SignalKind,
    eval: &EvalConfig,
    seed: u64,
    threads: usize,
) -> Result<MetricsReport> {
    evaluate_method(
        Method::Model { cfg, params },
        eeg_test,
        noise_test,
        kind,
        eval,
        seed,
        threads,
    )
}
