//! Kernel evaluators and the convolutional filters applier.
//!
//! ```text
//!  psd(noise) ─┐
//!  psd(noisy) ─┼─ concat ─► [3, F] ─► evaluator_s ─► bank_s [C_s, C_{s-1}, N]
//!  ratio ──────┘                                        │
//!  noisy [1, N] ─► conv(bank_1) ─ elu ─► … ─► conv(bank_S) ─► denoised [N]
//! ```

use super::params::{param_layout, Branch};
use super::{ModelConfig, ModelError, ModelParams};
use crate::tensor::{ComplexVar, Graph, Tensor, Var};

/// Graph handles for every parameter tensor, in layout order.
#[derive(Debug, Clone)]
pub struct ParamVars {
    vars: Vec<Var>,
}

impl ParamVars {
    /// Records `params` on `g`, as tracked parameters when `trainable`,
    /// otherwise as constants.
    pub fn register(g: &mut Graph, params: &ModelParams, trainable: bool) -> Self {
        let vars = params
            .tensors()
            .map(|t| {
                if trainable {
                    g.param(t.clone())
                } else {
                    g.input(t.clone())
                }
            })
            .collect();
        Self { vars }
    }

    /// Wraps handles that were recorded elsewhere, in layout order.
    pub fn from_vars(vars: Vec<Var>) -> Self {
        Self { vars }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    fn per_step(cfg: &ModelConfig) -> usize {
        4 * cfg.branch_layers + 2
    }

    fn branch_layer(&self, cfg: &ModelConfig, step: usize, br: Branch, layer: usize) -> (Var, Var) {
        let base = (step - 1) * Self::per_step(cfg)
            + match br {
                Branch::Real => 0,
                Branch::Imag => 2 * cfg.branch_layers,
            }
            + 2 * layer;
        (self.vars[base], self.vars[base + 1])
    }

    fn mix(&self, cfg: &ModelConfig, step: usize) -> (Var, Var) {
        let base = step * Self::per_step(cfg) - 2;
        (self.vars[base], self.vars[base + 1])
    }
}

/// Time-domain filters for every step of the cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    /// Step `s` holds a `[C_s, C_{s-1}, N]` tensor.
    pub steps: Vec<Tensor>,
}

impl FilterBank {
    pub fn max_abs_tap(&self) -> f64 {
        self.steps.iter().map(Tensor::max_abs).fold(0.0, f64::max)
    }
}

/// Handles produced by one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Denoised standardized signal, shape `[N]`.
    pub output: Var,
    pub banks: Vec<Var>,
    pub spectra: Var,
}

/// One kernel-evaluator block.
///
/// Each branch runs `B` same-padded convolution + `tanh` layers over the
/// frequency axis of the `[3, F]` spectra, ending with `C_s·C_{s−1}`
/// channels. The real and imaginary outputs form half-spectra that are
/// inverse-transformed to length-`N` filters, linearly mixed by a size-1
/// convolution and bounded by a final `tanh`.
pub fn kernel_evaluator(
    g: &mut Graph,
    cfg: &ModelConfig,
    step: usize,
    spectra: Var,
    pv: &ParamVars,
) -> Result<Var, ModelError> {
    let f = cfg.spectrum_len();
    if g.value(spectra)?.shape() != [3, f] {
        return Err(ModelError::Dimension(format!(
            "spectra must be [3, {f}], got {:?}",
            g.value(spectra)?.shape()
        )));
    }
    if step == 0 || step > cfg.steps {
        return Err(ModelError::Dimension(format!(
            "step {step} outside 1..={}",
            cfg.steps
        )));
    }
    let mut branch_out = [spectra; 2];
    for (slot, br) in branch_out.iter_mut().zip([Branch::Real, Branch::Imag]) {
        let mut h = spectra;
        for layer in 0..cfg.branch_layers {
            let (kernel, bias) = pv.branch_layer(cfg, step, br, layer);
            h = g.conv1d_same(h, kernel)?;
            h = g.add_channel_bias(h, bias)?;
            h = g.tanh(h)?;
        }
        *slot = h;
    }
    let filters = g.irfft(ComplexVar {
        re: branch_out[0],
        im: branch_out[1],
    })?;
    let (kernel, bias) = pv.mix(cfg, step);
    let mixed = g.conv1d_same(filters, kernel)?;
    let mixed = g.add_channel_bias(mixed, bias)?;
    let taps = g.tanh(mixed)?;
    let (c_out, c_in) = cfg.step_channels(step);
    Ok(g.reshape(taps, &[c_out, c_in, cfg.signal_length])?)
}

/// Applies the banks in cascade: ELU after every step except the last.
pub fn filters_applier(g: &mut Graph, noisy: Var, banks: &[Var]) -> Result<Var, ModelError> {
    if banks.is_empty() {
        return Err(ModelError::Dimension("no filter banks".into()));
    }
    let mut h = noisy;
    for (i, &bank) in banks.iter().enumerate() {
        h = g.conv1d_same(h, bank)?;
        if i + 1 < banks.len() {
            h = g.elu(h)?;
        }
    }
    Ok(h)
}

fn check_len(what: &str, t: &Tensor, want: usize) -> Result<(), ModelError> {
    if t.shape() != [want] {
        return Err(ModelError::Dimension(format!(
            "{what} must have shape [{want}], got {:?}",
            t.shape()
        )));
    }
    Ok(())
}

/// Records the full model on `g`.
///
/// Inputs are the standardized noisy signal and the periodograms of the
/// standardized noise and noisy signal.
pub fn forward(
    g: &mut Graph,
    cfg: &ModelConfig,
    pv: &ParamVars,
    noisy: &Tensor,
    psd_noise: &Tensor,
    psd_noisy: &Tensor,
) -> Result<ForwardPass, ModelError> {
    let n = cfg.signal_length;
    let f = cfg.spectrum_len();
    check_len("noisy signal", noisy, n)?;
    check_len("noise PSD", psd_noise, f)?;
    check_len("noisy PSD", psd_noisy, f)?;
    if pv.vars.len() != param_layout(cfg).len() {
        return Err(ModelError::ParamMismatch(format!(
            "{} parameter handles for a layout of {}",
            pv.vars.len(),
            param_layout(cfg).len()
        )));
    }

    let pn = g.input(psd_noise.reshape(&[1, f])?);
    let py = g.input(psd_noisy.reshape(&[1, f])?);
    let ratio = g.div_eps(py, pn, cfg.epsilon_ratio)?;
    let spectra = g.concat_channels(&[pn, py, ratio])?;

    let banks = (1..=cfg.steps)
        .map(|s| kernel_evaluator(g, cfg, s, spectra, pv))
        .collect::<Result<Vec<_>, _>>()?;

    let x = g.input(noisy.reshape(&[1, n])?);
    let out = filters_applier(g, x, &banks)?;
    let output = g.reshape(out, &[n])?;
    Ok(ForwardPass {
        output,
        banks,
        spectra,
    })
}

/// Inference-only forward pass.
pub fn denoise(
    cfg: &ModelConfig,
    params: &ModelParams,
    noisy: &Tensor,
    psd_noise: &Tensor,
    psd_noisy: &Tensor,
) -> Result<Tensor, ModelError> {
    let mut g = Graph::new();
    let pv = ParamVars::register(&mut g, params, false);
    let pass = forward(&mut g, cfg, &pv, noisy, psd_noise, psd_noisy)?;
    Ok(g.value(pass.output)?.clone())
}

/// The filter banks the evaluators produce for a pair of spectra.
pub fn filter_banks(
    cfg: &ModelConfig,
    params: &ModelParams,
    psd_noise: &Tensor,
    psd_noisy: &Tensor,
) -> Result<FilterBank, ModelError> {
    let mut g = Graph::new();
    let pv = ParamVars::register(&mut g, params, false);
    let noisy = Tensor::zeros(&[cfg.signal_length]);
    let pass = forward(&mut g, cfg, &pv, &noisy, psd_noise, psd_noisy)?;
    let steps = pass
        .banks
        .iter()
        .map(|&b| g.value(b).cloned())
        .collect::<Result<_, _>>()?;
    Ok(FilterBank { steps })
}

/// Runs the filters applier on a `[1, N]` signal with explicit banks.
pub fn apply_filter_bank(noisy: &Tensor, bank: &FilterBank) -> Result<Tensor, ModelError> {
    let mut g = Graph::new();
    let x = g.input(noisy.clone());
    let banks: Vec<Var> = bank.steps.iter().map(|t| g.input(t.clone())).collect();
    let out = filters_applier(&mut g, x, &banks)?;
    Ok(g.value(out)?.clone())
}
