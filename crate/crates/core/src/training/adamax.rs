use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::model::ModelParams;
use crate::tensor::Tensor;

pub const ADAMAX_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamaxHyper {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for AdamaxHyper {
    fn default() -> Self {
        Self {
            alpha: 0.002,
            beta1: 0.9,
            beta2: 0.999,
        }
    }
}

impl AdamaxHyper {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            v.push("alpha: must be finite and > 0".into());
        }
        if !(0.0..1.0).contains(&self.beta1) {
            v.push("beta1: must lie in [0, 1)".into());
        }
        if !(0.0..1.0).contains(&self.beta2) {
            v.push("beta2: must lie in [0, 1)".into());
        }
        v
    }
}

/// First moment `m`, infinity-norm accumulator `u` and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub hyper: AdamaxHyper,
    pub t: u64,
    pub m: Vec<Tensor>,
    pub u: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new(params: &ModelParams, hyper: AdamaxHyper) -> Self {
        let zeros: Vec<Tensor> = params.tensors().map(|t| Tensor::zeros(t.shape())).collect();
        Self {
            hyper,
            t: 0,
            m: zeros.clone(),
            u: zeros,
        }
    }
}

/// One AdaMax update:
///
/// ```text
/// m ← β1·m + (1−β1)·g
/// u ← max(β2·u, |g|)
/// θ ← θ − α/(1−β1^t) · m/(u + ε)
/// ```
pub fn adamax_step(
    params: &mut ModelParams,
    grads: &[Tensor],
    state: &mut OptimizerState,
) -> Result<(), TrainError> {
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(TrainError::Shape(format!(
            "{} gradients / {} moments for {} parameters",
            grads.len(),
            state.m.len(),
            params.len()
        )));
    }
    for ((p, g), m) in params.tensors().zip(grads).zip(&state.m) {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(TrainError::Shape(format!(
                "gradient {:?} vs parameter {:?}",
                g.shape(),
                p.shape()
            )));
        }
    }
    state.t += 1;
    let AdamaxHyper { alpha, beta1, beta2 } = state.hyper;
    let step = alpha / (1.0 - beta1.powi(state.t as i32));
    for (((p, g), m), u) in params
        .tensors_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.u.iter_mut())
    {
        let (p, m, u) = (p.data_mut(), m.data_mut(), u.data_mut());
        for i in 0..p.len() {
            let gi = g.data()[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            u[i] = (beta2 * u[i]).max(gi.abs());
            p[i] -= step * m[i] / (u[i] + ADAMAX_EPSILON);
        }
    }
    Ok(())
}
