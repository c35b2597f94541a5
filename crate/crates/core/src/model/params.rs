use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModelConfig, ModelError};
use crate::tensor::Tensor;

/// Branch of a kernel evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Real,
    Imag,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::Real => "real",
            Branch::Imag => "imag",
        }
    }
}

/// Name and shape of one trainable tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl ParamSpec {
    fn is_bias(&self) -> bool {
        self.shape.len() == 1
    }
}

/// Ordered parameter layout for a config.
///
/// Per step: real-branch layers, imaginary-branch layers, then the
/// kernel-size-1 mixing layer; each layer contributes a `kernel` and a `bias`.
pub fn param_layout(cfg: &ModelConfig) -> Vec<ParamSpec> {
    let h = cfg.branch_hidden_channels;
    let k = cfg.branch_kernel_size;
    let b = cfg.branch_layers;
    let mut out = Vec::new();
    for s in 1..=cfg.steps {
        let c = cfg.step_filters(s);
        for br in [Branch::Real, Branch::Imag] {
            for l in 0..b {
                let c_in = if l == 0 { 3 } else { h };
                let c_out = if l + 1 == b { c } else { h };
                out.push(ParamSpec {
                    name: layer_name(s, br.tag(), l, "kernel"),
                    shape: vec![c_out, c_in, k],
                });
                out.push(ParamSpec {
                    name: layer_name(s, br.tag(), l, "bias"),
                    shape: vec![c_out],
                });
            }
        }
        out.push(ParamSpec {
            name: format!("step{s}.mix.kernel"),
            shape: vec![c, c, 1],
        });
        out.push(ParamSpec {
            name: format!("step{s}.mix.bias"),
            shape: vec![c],
        });
    }
    out
}

fn layer_name(step: usize, branch: &str, layer: usize, what: &str) -> String {
    format!("step{step}.{branch}.layer{layer}.{what}")
}

/// Closed-form trainable parameter count.
///
/// For step `s` with `c = C_s·C_{s−1}`:
/// `2·[3Hk + H + (B−2)(H²k + H) + Hck + c] + c² + c`.
pub fn closed_form_param_count(cfg: &ModelConfig) -> usize {
    let h = cfg.branch_hidden_channels;
    let k = cfg.branch_kernel_size;
    let b = cfg.branch_layers;
    (1..=cfg.steps)
        .map(|s| {
            let c = cfg.step_filters(s);
            let branch = 3 * h * k + h + (b - 2) * (h * h * k + h) + h * c * k + c;
            2 * branch + c * c + c
        })
        .sum()
}

/// All trainable tensors of a model, in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    entries: Vec<(String, Tensor)>,
}

impl ModelParams {
    /// Assembles parameters, checking names and shapes against the layout.
    pub fn from_entries(cfg: &ModelConfig, entries: Vec<(String, Tensor)>) -> Result<Self, ModelError> {
        let layout = param_layout(cfg);
        if layout.len() != entries.len() {
            return Err(ModelError::ParamMismatch(format!(
                "expected {} tensors, got {}",
                layout.len(),
                entries.len()
            )));
        }
        for (spec, (name, t)) in layout.iter().zip(&entries) {
            if &spec.name != name || spec.shape != t.shape() {
                return Err(ModelError::ParamMismatch(format!(
                    "expected {} {:?}, got {} {:?}",
                    spec.name,
                    spec.shape,
                    name,
                    t.shape()
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Every tensor filled with `value`.
    pub fn constant(cfg: &ModelConfig, value: f64) -> Self {
        let entries = param_layout(cfg)
            .into_iter()
            .map(|s| {
                let t = Tensor::filled(&s.shape, value);
                (s.name, t)
            })
            .collect();
        Self { entries }
    }

    pub fn zeros(cfg: &ModelConfig) -> Self {
        Self::constant(cfg, 0.0)
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Tensor> {
        self.entries.iter().map(|(_, t)| t)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    pub(crate) fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    /// Replaces one tensor's values, keeping its shape.
    pub fn set(&mut self, name: &str, values: Vec<f64>) -> Result<(), ModelError> {
        let slot = self
            .entries
            .iter_mut()
            .find(|(n, _)| n == name)
            .ok_or_else(|| ModelError::ParamMismatch(format!("no parameter named {name}")))?;
        let shape = slot.1.shape().to_vec();
        slot.1 = Tensor::new(values, shape).map_err(ModelError::Tensor)?;
        Ok(())
    }
}

/// Glorot-uniform kernels (`±√(6/(fan_in+fan_out))` with fan = channels ×
/// kernel size) and zero biases, drawn in layout order from a ChaCha stream.
///
/// Values are sampled in `f32` so they survive the narrow weight format
/// unchanged.
pub fn init_params(cfg: &ModelConfig, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = param_layout(cfg)
        .into_iter()
        .map(|spec| {
            let t = if spec.is_bias() {
                Tensor::zeros(&spec.shape)
            } else {
                let (c_out, c_in, k) = (spec.shape[0], spec.shape[1], spec.shape[2]);
                let bound = (6.0 / ((c_in * k + c_out * k) as f64)).sqrt() as f32;
                let n = c_out * c_in * k;
                let data = (0..n)
                    .map(|_| rng.random_range(-bound..bound) as f64)
                    .collect();
                Tensor::from_parts_unchecked(data, spec.shape.clone())
            };
            (spec.name, t)
        })
        .collect();
    ModelParams { entries }
}
