use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

/// Source of a recording: clean EEG or one of the two artifact types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Eeg,
    Eog,
    Emg,
}

impl SignalKind {
    pub fn code(self) -> u8 {
        match self {
            SignalKind::Eeg => 0,
            SignalKind::Eog => 1,
            SignalKind::Emg => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(SignalKind::Eeg),
            1 => Some(SignalKind::Eog),
            2 => Some(SignalKind::Emg),
            _ => None,
        }
    }

    pub fn is_artifact(self) -> bool {
        self != SignalKind::Eeg
    }

    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Eeg => "eeg",
            SignalKind::Eog => "eog",
            SignalKind::Emg => "emg",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eeg" => Ok(SignalKind::Eeg),
            "eog" => Ok(SignalKind::Eog),
            "emg" => Ok(SignalKind::Emg),
            other => Err(format!("unknown signal kind {other:?}")),
        }
    }
}

/// One fixed-length single-channel recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub samples: Tensor,
    pub kind: SignalKind,
    pub source_id: String,
}

impl Segment {
    pub fn new(samples: Tensor, kind: SignalKind, source_id: impl Into<String>) -> Self {
        Self {
            samples,
            kind,
            source_id: source_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        self.samples.data()
    }
}
