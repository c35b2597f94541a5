//! Checkpoints: an `EDNW` container whose header adds optimizer, RNG and
//! history state, with `m.<name>` and `u.<name>` moment tensors stored after
//! the parameters.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::adamax::{AdamaxHyper, OptimizerState};
use super::trainer::{TrainConfig, TrainRecord};
use super::TrainError;
use crate::model::weights::{decode_container, encode_container, params_from_container};
use crate::model::{ModelConfig, ModelParams, WeightsError};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub params: ModelParams,
    pub optimizer: OptimizerState,
    pub seed: u64,
    /// Completed epochs.
    pub epoch: usize,
    pub train_config: TrainConfig,
    pub history: Vec<TrainRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OptimizerHeader {
    t: u64,
    alpha: f64,
    beta1: f64,
    beta2: f64,
}

/// Every stream is derived from `(seed, epoch, step, element)`, so the seed
/// and the epoch counter are the whole generator state.
#[derive(Debug, Serialize, Deserialize)]
struct RngState {
    seed: u64,
    epoch: usize,
}

fn field<T: serde::de::DeserializeOwned>(h: &Map<String, Value>, key: &str) -> Result<T, TrainError> {
    let v = h
        .get(key)
        .ok_or_else(|| WeightsError::HeaderInconsistent(format!("checkpoint header lacks `{key}`")))?;
    Ok(serde_json::from_value(v.clone()).map_err(WeightsError::from)?)
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Result<Vec<u8>, TrainError> {
    let o = &ck.optimizer;
    let mut extra = Map::new();
    let to = |v: Result<Value, serde_json::Error>| v.map_err(WeightsError::from);
    extra.insert(
        "optimizer".into(),
        to(serde_json::to_value(OptimizerHeader {
            t: o.t,
            alpha: o.hyper.alpha,
            beta1: o.hyper.beta1,
            beta2: o.hyper.beta2,
        }))?,
    );
    extra.insert(
        "rng_state".into(),
        to(serde_json::to_value(RngState {
            seed: ck.seed,
            epoch: ck.epoch,
        }))?,
    );
    extra.insert("epoch".into(), Value::from(ck.epoch));
    extra.insert(
        "loss_weights".into(),
        to(serde_json::to_value(ck.train_config.loss_weights))?,
    );
    extra.insert("train_config".into(), to(serde_json::to_value(&ck.train_config))?);
    extra.insert("history".into(), to(serde_json::to_value(&ck.history))?);

    let names: Vec<&str> = ck.params.entries().iter().map(|(n, _)| n.as_str()).collect();
    let m_names: Vec<String> = names.iter().map(|n| format!("m.{n}")).collect();
    let u_names: Vec<String> = names.iter().map(|n| format!("u.{n}")).collect();
    let mut tensors: Vec<(&str, &Tensor)> = ck.params.entries().iter().map(|(n, t)| (n.as_str(), t)).collect();
    tensors.extend(m_names.iter().map(String::as_str).zip(&o.m));
    tensors.extend(u_names.iter().map(String::as_str).zip(&o.u));
    Ok(encode_container(&ck.model, extra, &tensors)?)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint, TrainError> {
    let c = decode_container(bytes)?;
    let (params, model) = params_from_container(&c)?;
    let p = params.len();
    if c.tensors.len() != 3 * p {
        return Err(WeightsError::HeaderInconsistent(format!(
            "checkpoint holds {} tensors, expected {}",
            c.tensors.len(),
            3 * p
        ))
        .into());
    }
    let moments = |prefix: &str, slice: &[(String, Tensor)]| -> Result<Vec<Tensor>, TrainError> {
        slice
            .iter()
            .zip(params.entries())
            .map(|((name, t), (pname, pt))| {
                if *name != format!("{prefix}.{pname}") || t.shape() != pt.shape() {
                    return Err(WeightsError::HeaderInconsistent(format!(
                        "unexpected moment tensor {name} {:?}",
                        t.shape()
                    ))
                    .into());
                }
                Ok(t.clone())
            })
            .collect()
    };
    let m = moments("m", &c.tensors[p..2 * p])?;
    let u = moments("u", &c.tensors[2 * p..])?;

    let opt: OptimizerHeader = field(&c.header, "optimizer")?;
    let rng: RngState = field(&c.header, "rng_state")?;
    let epoch: usize = field(&c.header, "epoch")?;
    if rng.epoch != epoch {
        return Err(WeightsError::HeaderInconsistent(format!(
            "rng_state epoch {} disagrees with epoch {epoch}",
            rng.epoch
        ))
        .into());
    }
    let train_config: TrainConfig = field(&c.header, "train_config")?;
    let history: Vec<TrainRecord> = field(&c.header, "history")?;
    Ok(Checkpoint {
        model,
        params,
        optimizer: OptimizerState {
            hyper: AdamaxHyper {
                alpha: opt.alpha,
                beta1: opt.beta1,
                beta2: opt.beta2,
            },
            t: opt.t,
            m,
            u,
        },
        seed: rng.seed,
        epoch,
        train_config,
        history,
    })
}

pub fn load_checkpoint(path: impl AsRef<std::path::Path>) -> Result<Checkpoint, TrainError> {
    decode_checkpoint(&std::fs::read(path)?)
}
