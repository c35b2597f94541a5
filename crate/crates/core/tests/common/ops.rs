//! Gradient-check catalogue shared by the per-op tests and the acceptance run.

use freqdenoise::data::{generate_synthetic_corpus, make_model_inputs, standardize, synthesize, SnrConvention};
use freqdenoise::model::{forward, init_params, ParamVars};
use freqdenoise::tensor::fft::PsdWindow;
use freqdenoise::tensor::{grad_check, ComplexVar, GradCheckReport, Graph, Result, Tensor, TensorError, Var};
use freqdenoise::training::{loss, LossWeights};
use rand_chacha::ChaCha8Rng;

use super::{away_from_zero, rng, small_config, uniform};

pub const TOL: f64 = 1e-6;
pub const INSTANCES: u64 = 10;

type Build = Box<dyn Fn(&mut Graph, &[Var]) -> Result<Var>>;
type Inputs = Box<dyn Fn(&mut ChaCha8Rng) -> Vec<Tensor>>;

pub struct OpCase {
    pub name: String,
    pub build: Build,
    pub inputs: Inputs,
}

fn case(
    name: impl Into<String>,
    build: impl Fn(&mut Graph, &[Var]) -> Result<Var> + 'static,
    inputs: impl Fn(&mut ChaCha8Rng) -> Vec<Tensor> + 'static,
) -> OpCase {
    OpCase {
        name: name.into(),
        build: Box::new(build),
        inputs: Box::new(inputs),
    }
}

fn two(r: &mut ChaCha8Rng) -> Vec<Tensor> {
    vec![uniform(r, &[2, 5], -2.0, 2.0), uniform(r, &[2, 5], -2.0, 2.0)]
}

fn one(r: &mut ChaCha8Rng) -> Vec<Tensor> {
    vec![uniform(r, &[3, 4], -2.0, 2.0)]
}

/// Every differentiable graph operation with an input generator.
pub fn op_cases() -> Vec<OpCase> {
    let mut v = Vec::new();
    for k in [1, 3, 4, 8] {
        v.push(case(
            format!("conv1d_same k={k}"),
            |g, v| g.conv1d_same(v[0], v[1]),
            move |r| vec![uniform(r, &[2, 8], -1.0, 1.0), uniform(r, &[3, 2, k], -1.0, 1.0)],
        ));
    }
    v.push(case(
        "conv1d_same k=N",
        |g, v| g.conv1d_same(v[0], v[1]),
        |r| vec![uniform(r, &[1, 16], -1.0, 1.0), uniform(r, &[2, 1, 16], -1.0, 1.0)],
    ));
    v.push(case(
        "add_channel_bias",
        |g, v| g.add_channel_bias(v[0], v[1]),
        |r| vec![uniform(r, &[3, 5], -1.0, 1.0), uniform(r, &[3], -1.0, 1.0)],
    ));
    v.push(case("tanh", |g, v| g.tanh(v[0]), |r| vec![uniform(r, &[2, 6], -3.0, 3.0)]));
    // ELU is only once differentiable at 0
    v.push(case("elu", |g, v| g.elu(v[0]), |r| vec![away_from_zero(r, &[2, 6], 1e-2, 3.0)]));
    v.push(case("sqrt", |g, v| g.sqrt(v[0]), |r| vec![uniform(r, &[7], 0.2, 3.0)]));
    v.push(case("add", |g, v| g.add(v[0], v[1]), two));
    v.push(case("sub", |g, v| g.sub(v[0], v[1]), two));
    v.push(case("mul", |g, v| g.mul(v[0], v[1]), two));
    v.push(case(
        "div_eps",
        |g, v| g.div_eps(v[0], v[1], 1e-8),
        |r| vec![uniform(r, &[2, 5], -2.0, 2.0), uniform(r, &[2, 5], 0.3, 2.0)],
    ));
    v.push(case("scale", |g, v| g.scale(v[0], -1.7), |r| vec![uniform(r, &[4], -1.0, 1.0)]));
    v.push(case(
        "concat_channels",
        |g, v| g.concat_channels(&[v[0], v[1], v[2]]),
        |r| {
            vec![
                uniform(r, &[1, 4], -1.0, 1.0),
                uniform(r, &[2, 4], -1.0, 1.0),
                uniform(r, &[1, 4], -1.0, 1.0),
            ]
        },
    ));
    v.push(case(
        "reshape",
        |g, v| {
            let x = g.reshape(v[0], &[3, 4])?;
            let y = g.tanh(x)?;
            g.reshape(y, &[12])
        },
        |r| vec![uniform(r, &[2, 6], -1.0, 1.0)],
    ));
    v.push(case(
        "rfft",
        |g, v| {
            let c = g.rfft(v[0])?;
            let im = g.scale(c.im, 0.7)?;
            g.add(c.re, im)
        },
        |r| vec![uniform(r, &[2, 16], -1.0, 1.0)],
    ));
    v.push(case(
        "irfft",
        |g, v| g.irfft(ComplexVar { re: v[0], im: v[1] }),
        |r| vec![uniform(r, &[2, 9], -1.0, 1.0), uniform(r, &[2, 9], -1.0, 1.0)],
    ));
    v.push(case("psd", |g, v| g.psd(v[0]), |r| vec![uniform(r, &[16], -1.0, 1.0)]));
    v.push(case(
        "psd_hann",
        |g, v| g.psd_windowed(v[0], PsdWindow::Hann),
        |r| vec![uniform(r, &[2, 16], -1.0, 1.0)],
    ));
    v.push(case("sum", |g, v| g.sum(v[0]), one));
    v.push(case("mean", |g, v| g.mean(v[0]), one));
    v.push(case("sum_squares", |g, v| g.sum_squares(v[0]), one));
    v.push(case("log_cosh_sum", |g, v| g.log_cosh_sum(v[0]), one));
    v
}

/// Worst relative error of `c` over `INSTANCES` random inputs.
pub fn check_op(c: &OpCase) -> std::result::Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut r = rng(seed * 7919 + c.name.len() as u64);
        let report = grad_check(&*c.build, &(c.inputs)(&mut r), TOL).map_err(|e| e.to_string())?;
        if !report.passed {
            return Err(format!(
                "{} instance {seed}: max rel error {:.3e} at {:?}",
                c.name, report.max_rel_error, report.worst
            ));
        }
        worst = worst.max(report.max_rel_error);
    }
    Ok(worst)
}

/// Full forward pass plus loss on the small N = 64 architecture. Even
/// instances use white-noise mixtures, odd ones synthetic EOG/EMG ones.
pub fn model_loss_check(inst: u64) -> GradCheckReport {
    let cfg = small_config(64);
    let corpus = generate_synthetic_corpus(10, 64, 12);
    let (y, pn, py, x) = if inst.is_multiple_of(2) {
        let mut r = rng(inst);
        let x = uniform(&mut r, &[64], -1.0, 1.0);
        let noise = uniform(&mut r, &[64], -1.0, 1.0);
        let y = x.zip_map(&noise, |a, b| a + b).unwrap();
        let psd = |t: &Tensor| Tensor::vector(freqdenoise::tensor::fft::periodogram(t.data()).unwrap()).unwrap();
        (y.clone(), psd(&noise), psd(&y), x)
    } else {
        let m = synthesize(&corpus[(inst % 10) as usize], &corpus[10 + (inst % 20) as usize], -3.0, SnrConvention::RmsRatio).unwrap();
        let ex = standardize(&m).unwrap();
        let mi = make_model_inputs(&ex).unwrap();
        (mi.noisy, mi.psd_noise, mi.psd_noisy, ex.x_hat)
    };
    let params = init_params(&cfg, inst);
    let tensors: Vec<Tensor> = params.tensors().cloned().collect();
    let graph_err = |e: &dyn std::fmt::Display| TensorError::InvalidGraph(e.to_string());
    grad_check(
        |g, vars| {
            let pv = ParamVars::from_vars(vars.to_vec());
            let pass = forward(g, &cfg, &pv, &y, &pn, &py).map_err(|e| graph_err(&e))?;
            loss(g, &x, pass.output, &LossWeights::default()).map_err(|e| graph_err(&e))
        },
        &tensors,
        TOL,
    )
    .unwrap()
}
