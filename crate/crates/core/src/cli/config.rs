use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::data::{
    generate_synthetic_corpus, load_segments, split_by_kind, LoadOptions, Segment, SegmentFormat,
    SignalKind,
};
use crate::metrics::EvalConfig;
use crate::model::ModelConfig;
use crate::training::TrainConfig;

/// Architecture settings other than the signal length, which lives at the
/// top level of the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub steps: usize,
    pub channel_progression: Vec<usize>,
    pub branch_layers: usize,
    pub branch_hidden_channels: usize,
    pub branch_kernel_size: usize,
    pub epsilon_ratio: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::default();
        Self {
            steps: d.steps,
            channel_progression: d.channel_progression,
            branch_layers: d.branch_layers,
            branch_hidden_channels: d.branch_hidden_channels,
            branch_kernel_size: d.branch_kernel_size,
            epsilon_ratio: d.epsilon_ratio,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub eeg: Vec<PathBuf>,
    pub eog: Vec<PathBuf>,
    pub emg: Vec<PathBuf>,
}

impl DataPaths {
    fn is_empty(&self) -> bool {
        self.eeg.is_empty() && self.eog.is_empty() && self.emg.is_empty()
    }
}

/// Segment files per kind. With no paths at all, a synthetic corpus of
/// `synthetic_count` segments per kind is generated from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub paths: DataPaths,
    /// Overrides detection by file extension.
    pub format: Option<SegmentFormat>,
    pub train_fraction: f64,
    pub synthetic_count: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            paths: DataPaths::default(),
            format: None,
            train_fraction: 0.6,
            synthetic_count: 64,
        }
    }
}

/// A complete run description. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub signal_length: usize,
    pub model: ModelSection,
    pub train: TrainConfig,
    pub data: DataSection,
    pub eval: EvalConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            signal_length: 512,
            model: ModelSection::default(),
            train: TrainConfig::default(),
            data: DataSection::default(),
            eval: EvalConfig::default(),
            output_dir: PathBuf::from("run"),
        }
    }
}

fn prefixed(section: &str, v: Vec<String>) -> impl Iterator<Item = String> + '_ {
    v.into_iter().map(move |m| format!("{section}.{m}"))
}

impl RunConfig {
    pub fn model_config(&self) -> ModelConfig {
        let m = &self.model;
        ModelConfig {
            signal_length: self.signal_length,
            steps: m.steps,
            channel_progression: m.channel_progression.clone(),
            branch_layers: m.branch_layers,
            branch_hidden_channels: m.branch_hidden_channels,
            branch_kernel_size: m.branch_kernel_size,
            epsilon_ratio: m.epsilon_ratio,
        }
    }

    /// Every violated constraint, each prefixed with its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for m in self.model_config().violations() {
            if m.starts_with("signal_length") {
                v.push(m);
            } else {
                v.push(format!("model.{m}"));
            }
        }
        v.extend(prefixed("train", self.train.violations()));
        v.extend(prefixed("eval", self.eval.violations()));
        let d = &self.data;
        if !(d.train_fraction > 0.0 && d.train_fraction < 1.0) {
            v.push("data.train_fraction: must lie in (0, 1)".into());
        }
        if d.paths.is_empty() {
            if d.synthetic_count < 2 {
                v.push("data.synthetic_count: need at least 2 segments per kind".into());
            }
        } else if d.paths.eeg.is_empty() || (d.paths.eog.is_empty() && d.paths.emg.is_empty()) {
            v.push("data.paths: need eeg files and at least one of eog or emg".into());
        }
        v
    }

    /// Parses and validates a JSON config, resolving relative paths against
    /// `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let v = cfg.violations();
        if !v.is_empty() {
            return Err(CliError::Usage(format!(
                "invalid config:\n  {}",
                v.join("\n  ")
            )));
        }
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.output_dir);
        let paths = &mut cfg.data.paths;
        for p in paths.eeg.iter_mut().chain(&mut paths.eog).chain(&mut paths.emg) {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    /// All segments named by the data section, or the synthetic corpus.
    pub fn load_corpus(&self) -> Result<Vec<Segment>, CliError> {
        let d = &self.data;
        if d.paths.is_empty() {
            return Ok(generate_synthetic_corpus(
                d.synthetic_count,
                self.signal_length,
                self.seed,
            ));
        }
        let mut out = Vec::new();
        for (kind, files) in [
            (SignalKind::Eeg, &d.paths.eeg),
            (SignalKind::Eog, &d.paths.eog),
            (SignalKind::Emg, &d.paths.emg),
        ] {
            let opts = LoadOptions {
                signal_length: self.signal_length,
                kind: Some(kind),
            };
            for f in files {
                let format = d.format.unwrap_or_else(|| SegmentFormat::from_path(f));
                let segs = load_segments(f, format, &opts)
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", f.display())))?;
                out.extend(segs);
            }
        }
        Ok(out)
    }

    /// Seeded per-kind train/test partition of the corpus.
    pub fn split_corpus(&self) -> Result<(Vec<Segment>, Vec<Segment>), CliError> {
        let corpus = self.load_corpus()?;
        Ok(split_by_kind(&corpus, self.data.train_fraction, self.seed)?)
    }
}
