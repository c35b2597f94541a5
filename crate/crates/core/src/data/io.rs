//! Segment files.
//!
//! `EDNB` binary layout (little-endian):
//! magic `EDNB`, `u32` version (1), `u32` segment count, `u32` segment
//! length, `u8` kind code (0 EEG, 1 EOG, 2 EMG), then `count × length`
//! `f32` samples, row-major.
//!
//! CSV: one segment per line, comma-separated decimal values, no header.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataError, Segment, SignalKind};
use crate::tensor::Tensor;

pub const SEGMENTS_MAGIC: [u8; 4] = *b"EDNB";
pub const SEGMENTS_VERSION: u32 = 1;
const HEADER_LEN: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentFormat {
    Ednb,
    Csv,
}

impl SegmentFormat {
    /// `.csv` selects CSV; anything else is treated as EDNB.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => SegmentFormat::Csv,
            _ => SegmentFormat::Ednb,
        }
    }
}

impl std::str::FromStr for SegmentFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ednb" => Ok(SegmentFormat::Ednb),
            "csv" => Ok(SegmentFormat::Csv),
            other => Err(format!("unknown segment format {other:?}")),
        }
    }
}

/// What the caller expects to find in a segment file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    pub signal_length: usize,
    /// Kind assigned to CSV rows. EDNB files carry their own kind; when set,
    /// a differing EDNB kind is an error.
    pub kind: Option<SignalKind>,
}

pub fn encode_ednb(segments: &[Segment]) -> Result<Vec<u8>, DataError> {
    let first = segments.first().ok_or(DataError::EmptyDataset)?;
    let (len, kind) = (first.len(), first.kind);
    for s in segments {
        if s.len() != len || s.kind != kind {
            return Err(DataError::Header(format!(
                "segment {} has length {} / kind {} but file uses {len} / {kind}",
                s.source_id,
                s.len(),
                s.kind
            )));
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * len * segments.len());
    out.extend_from_slice(&SEGMENTS_MAGIC);
    out.extend_from_slice(&SEGMENTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(segments.len() as u32).to_le_bytes());
    out.extend_from_slice(&(len as u32).to_le_bytes());
    out.push(kind.code());
    for s in segments {
        for &v in s.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_ednb(bytes: &[u8], opts: &LoadOptions, source: &str) -> Result<Vec<Segment>, DataError> {
    if bytes.len() < 4 || bytes[..4] != SEGMENTS_MAGIC {
        return Err(DataError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(DataError::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != SEGMENTS_VERSION {
        return Err(DataError::UnsupportedVersion(version));
    }
    let count = u32_at(8) as usize;
    let len = u32_at(12) as usize;
    let kind = SignalKind::from_code(bytes[16])
        .ok_or_else(|| DataError::Header(format!("unknown kind code {}", bytes[16])))?;
    if len != opts.signal_length {
        return Err(DataError::Header(format!(
            "segment length {len} differs from configured {}",
            opts.signal_length
        )));
    }
    if let Some(want) = opts.kind {
        if want != kind {
            return Err(DataError::Header(format!("file holds {kind}, expected {want}")));
        }
    }
    let expected = HEADER_LEN + 4 * count * len;
    if bytes.len() < expected {
        return Err(DataError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(DataError::Header(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    (0..count)
        .map(|i| {
            let start = HEADER_LEN + 4 * i * len;
            let values: Vec<f64> = bytes[start..start + 4 * len]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            let samples = Tensor::vector(values).map_err(|e| match e {
                crate::tensor::TensorError::NonFinite { index } => DataError::NonFinite {
                    record: i,
                    index,
                },
                other => DataError::Header(other.to_string()),
            })?;
            Ok(Segment::new(samples, kind, format!("{source}#{i}")))
        })
        .collect()
}

pub fn encode_csv(segments: &[Segment]) -> String {
    let mut out = String::new();
    for s in segments {
        let row: Vec<String> = s.data().iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses comma-separated rows of exactly `len` finite values each.
pub fn parse_csv_rows(text: &str, len: usize) -> Result<Vec<Vec<f64>>, DataError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let values = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| DataError::Parse {
                        line: i + 1,
                        message: format!("{tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if values.len() != len {
                return Err(DataError::RaggedRow {
                    line: i + 1,
                    expected: len,
                    found: values.len(),
                });
            }
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite { record: i, index });
            }
            Ok(values)
        })
        .collect()
}

pub fn decode_csv(text: &str, opts: &LoadOptions, source: &str) -> Result<Vec<Segment>, DataError> {
    let kind = opts.kind.ok_or_else(|| {
        DataError::Header("CSV segment files need an explicit signal kind".into())
    })?;
    parse_csv_rows(text, opts.signal_length)?
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let samples = Tensor::vector(row).map_err(|e| DataError::Header(e.to_string()))?;
            Ok(Segment::new(samples, kind, format!("{source}#{i}")))
        })
        .collect()
}

/// Reads a segment file. No normalization is applied.
pub fn load_segments(
    path: impl AsRef<Path>,
    format: SegmentFormat,
    opts: &LoadOptions,
) -> Result<Vec<Segment>, DataError> {
    let path = path.as_ref();
    let source = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("segments")
        .to_string();
    match format {
        SegmentFormat::Ednb => decode_ednb(&fs::read(path)?, opts, &source),
        SegmentFormat::Csv => decode_csv(&fs::read_to_string(path)?, opts, &source),
    }
}

pub fn save_segments(
    path: impl AsRef<Path>,
    format: SegmentFormat,
    segments: &[Segment],
) -> Result<(), DataError> {
    match format {
        SegmentFormat::Ednb => fs::write(path, encode_ednb(segments)?)?,
        SegmentFormat::Csv => fs::write(path, encode_csv(segments))?,
    }
    Ok(())
}
