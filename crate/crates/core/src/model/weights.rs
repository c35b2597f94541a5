//! `EDNW` weight container.
//!
//! Layout (all integers little-endian):
//!
//! | bytes         | content                                       |
//! |---------------|-----------------------------------------------|
//! | 0..4          | magic `EDNW`                                  |
//! | 4..8          | `u32` version (1)                             |
//! | 8..12         | `u32` header length `H`                       |
//! | 12..12+H      | UTF-8 JSON header                             |
//! | 12+H..        | `f32` payloads in header order                |
//!
//! The header carries `config` and an ordered `tensors` list of
//! `{name, shape, dtype, byte_offset}`, offsets relative to the payload
//! start. Checkpoints reuse the container with extra header keys and extra
//! tensors after the parameters.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::{ModelConfig, ModelParams};
use crate::tensor::{DType, Tensor};

pub const WEIGHTS_MAGIC: [u8; 4] = *b"EDNW";
pub const WEIGHTS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes {0:?}, expected EDNW")]
    BadMagic([u8; 4]),
    #[error("unsupported weight file version {0}")]
    UnsupportedVersion(u32),
    #[error("header inconsistency: {0}")]
    HeaderInconsistent(String),
    #[error("truncated file: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("malformed header json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: DType,
    pub byte_offset: u64,
}

/// Decoded container: the full JSON header plus tensors in file order.
#[derive(Debug, Clone)]
pub struct Container {
    pub header: Map<String, Value>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Container {
    pub fn config(&self) -> Result<ModelConfig, WeightsError> {
        let cfg = self
            .header
            .get("config")
            .ok_or_else(|| WeightsError::HeaderInconsistent("missing config".into()))?;
        Ok(serde_json::from_value(cfg.clone())?)
    }
}

/// Serializes a container. `extra` keys are merged into the header next to
/// `config` and `tensors`.
pub fn encode_container(
    config: &ModelConfig,
    extra: Map<String, Value>,
    tensors: &[(&str, &Tensor)],
) -> Result<Vec<u8>, WeightsError> {
    let mut offset = 0u64;
    let entries: Vec<TensorEntry> = tensors
        .iter()
        .map(|(name, t)| {
            let e = TensorEntry {
                name: name.to_string(),
                shape: t.shape().to_vec(),
                dtype: DType::F32,
                byte_offset: offset,
            };
            offset += 4 * t.len() as u64;
            e
        })
        .collect();
    let mut header = extra;
    header.insert("config".into(), serde_json::to_value(config)?);
    header.insert("tensors".into(), serde_json::to_value(&entries)?);
    let header = serde_json::to_vec(&Value::Object(header))?;

    let mut out = Vec::with_capacity(12 + header.len() + offset as usize);
    out.extend_from_slice(&WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for (_, t) in tensors {
        for &v in t.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_container(bytes: &[u8]) -> Result<Container, WeightsError> {
    if bytes.len() < 12 {
        if bytes.len() >= 4 && bytes[..4] != WEIGHTS_MAGIC {
            return Err(WeightsError::BadMagic(bytes[..4].try_into().unwrap()));
        }
        return Err(WeightsError::Truncated {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != WEIGHTS_MAGIC {
        return Err(WeightsError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != WEIGHTS_VERSION {
        return Err(WeightsError::UnsupportedVersion(version));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload_start = 12 + header_len;
    if bytes.len() < payload_start {
        return Err(WeightsError::Truncated {
            expected: payload_start,
            actual: bytes.len(),
        });
    }
    let header: Map<String, Value> = serde_json::from_slice(&bytes[12..payload_start])?;
    let entries: Vec<TensorEntry> = serde_json::from_value(
        header
            .get("tensors")
            .cloned()
            .ok_or_else(|| WeightsError::HeaderInconsistent("missing tensors list".into()))?,
    )?;

    let mut expected_offset = 0u64;
    for e in &entries {
        if e.dtype != DType::F32 {
            return Err(WeightsError::HeaderInconsistent(format!(
                "{}: unsupported dtype {:?}",
                e.name, e.dtype
            )));
        }
        if e.shape.is_empty() || e.shape.contains(&0) {
            return Err(WeightsError::HeaderInconsistent(format!(
                "{}: invalid shape {:?}",
                e.name, e.shape
            )));
        }
        if e.byte_offset != expected_offset {
            return Err(WeightsError::HeaderInconsistent(format!(
                "{}: byte_offset {} but previous tensors end at {expected_offset}",
                e.name, e.byte_offset
            )));
        }
        expected_offset += 4 * e.shape.iter().product::<usize>() as u64;
    }
    let payload = &bytes[payload_start..];
    let want = expected_offset as usize;
    if payload.len() < want {
        return Err(WeightsError::Truncated {
            expected: payload_start + want,
            actual: bytes.len(),
        });
    }
    if payload.len() > want {
        return Err(WeightsError::HeaderInconsistent(format!(
            "payload has {} bytes but header describes {want}",
            payload.len()
        )));
    }

    let tensors = entries
        .into_iter()
        .map(|e| {
            let start = e.byte_offset as usize;
            let n: usize = e.shape.iter().product();
            let data = payload[start..start + 4 * n]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            let t = Tensor::new(data, e.shape).map_err(|err| {
                WeightsError::HeaderInconsistent(format!("{}: {err}", e.name))
            })?;
            Ok((e.name, t))
        })
        .collect::<Result<Vec<_>, WeightsError>>()?;
    Ok(Container { header, tensors })
}

pub fn encode_weights(params: &ModelParams, cfg: &ModelConfig) -> Result<Vec<u8>, WeightsError> {
    let tensors: Vec<(&str, &Tensor)> = params
        .entries()
        .iter()
        .map(|(n, t)| (n.as_str(), t))
        .collect();
    encode_container(cfg, Map::new(), &tensors)
}

/// Writes parameters as `f32`. Parameters produced by this crate are always
/// `f32`-representable, so the round trip is bit-exact.
pub fn save_weights(
    params: &ModelParams,
    cfg: &ModelConfig,
    path: impl AsRef<Path>,
) -> Result<(), WeightsError> {
    let bytes = encode_weights(params, cfg)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Extracts the model parameters from a decoded container. Extra tensors
/// after the parameters (optimizer moments in checkpoints) are ignored.
pub fn params_from_container(c: &Container) -> Result<(ModelParams, ModelConfig), WeightsError> {
    let cfg = c.config()?;
    cfg.validate()
        .map_err(|e| WeightsError::HeaderInconsistent(e.to_string()))?;
    let layout = super::param_layout(&cfg);
    if c.tensors.len() < layout.len() {
        return Err(WeightsError::HeaderInconsistent(format!(
            "config needs {} tensors, file lists {}",
            layout.len(),
            c.tensors.len()
        )));
    }
    let entries = c.tensors[..layout.len()].to_vec();
    let params = ModelParams::from_entries(&cfg, entries)
        .map_err(|e| WeightsError::HeaderInconsistent(e.to_string()))?;
    Ok((params, cfg))
}

pub fn decode_weights(bytes: &[u8]) -> Result<(ModelParams, ModelConfig), WeightsError> {
    params_from_container(&decode_container(bytes)?)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<(ModelParams, ModelConfig), WeightsError> {
    decode_weights(&fs::read(path)?)
}
