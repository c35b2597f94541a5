use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use super::fft::{self, half_len, irfft_rows, rfft_rows};
use super::ops::{self, conv_dims};
use super::{Result, Tensor, TensorError};

static NEXT_GRAPH_ID: AtomicU64 = AtomicU64::new(1);

/// Handle to a value recorded on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    graph: u64,
    index: usize,
}

/// Real and imaginary half-spectrum handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexVar {
    pub re: Var,
    pub im: Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceKind {
    Sum,
    Mean,
    SumSquares,
}

#[derive(Debug, Clone)]
enum Op {
    Input,
    Param,
    Conv { input: usize, kernels: usize },
    AddBias { x: usize, bias: usize },
    Tanh(usize),
    Elu(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    DivEps { a: usize, b: usize, eps: f64 },
    Scale(usize, f64),
    Sqrt(usize),
    Concat(Vec<usize>),
    Reshape(usize),
    RfftRe(usize),
    RfftIm(usize),
    Irfft { re: usize, im: usize },
    Psd { x: usize, norm: f64, re: Tensor, im: Tensor },
    Reduce(usize, ReduceKind),
    LogCoshSum(usize),
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Tensor,
    requires_grad: bool,
}

/// Append-only tape of executed operations.
///
/// Nodes are only ever appended and every node's inputs precede it, so the
/// tape is acyclic by construction and reverse iteration is a valid
/// topological order for [`Graph::backward`].
#[derive(Debug)]
pub struct Graph {
    id: u64,
    nodes: Vec<Node>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradients of a scalar with respect to every parameter of a graph.
#[derive(Debug, Clone)]
pub struct GradientMap {
    graph: u64,
    grads: BTreeMap<usize, Tensor>,
}

impl GradientMap {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        if v.graph != self.graph {
            return None;
        }
        self.grads.get(&v.index)
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }
}

impl Graph {
    pub fn new() -> Self {
        Self {
            id: NEXT_GRAPH_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn idx(&self, v: Var) -> Result<usize> {
        if v.graph != self.id || v.index >= self.nodes.len() {
            return Err(TensorError::InvalidGraph(format!(
                "variable {v:?} is not a node of graph {}",
                self.id
            )));
        }
        Ok(v.index)
    }

    fn push(&mut self, op: Op, value: Tensor, inputs: &[usize]) -> Var {
        let requires_grad = inputs.iter().any(|&i| self.nodes[i].requires_grad);
        self.nodes.push(Node {
            op,
            value,
            requires_grad,
        });
        Var {
            graph: self.id,
            index: self.nodes.len() - 1,
        }
    }

    /// Records a constant input; no gradient flows into it.
    pub fn input(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Input,
            value,
            requires_grad: false,
        });
        Var {
            graph: self.id,
            index: self.nodes.len() - 1,
        }
    }

    /// Records a tracked parameter; [`Graph::backward`] reports its gradient.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.nodes.push(Node {
            op: Op::Param,
            value,
            requires_grad: true,
        });
        Var {
            graph: self.id,
            index: self.nodes.len() - 1,
        }
    }

    pub fn value(&self, v: Var) -> Result<&Tensor> {
        Ok(&self.nodes[self.idx(v)?].value)
    }

    pub fn conv1d_same(&mut self, input: Var, kernels: Var) -> Result<Var> {
        let (i, k) = (self.idx(input)?, self.idx(kernels)?);
        let out = ops::conv1d_same(&self.nodes[i].value, &self.nodes[k].value)?;
        Ok(self.push(Op::Conv { input: i, kernels: k }, out, &[i, k]))
    }

    pub fn add_channel_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (xi, bi) = (self.idx(x)?, self.idx(bias)?);
        let out = ops::add_channel_bias(&self.nodes[xi].value, &self.nodes[bi].value)?;
        Ok(self.push(Op::AddBias { x: xi, bias: bi }, out, &[xi, bi]))
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        let i = self.idx(x)?;
        let out = self.nodes[i].value.map(f64::tanh);
        Ok(self.push(Op::Tanh(i), out, &[i]))
    }

    pub fn elu(&mut self, x: Var) -> Result<Var> {
        let i = self.idx(x)?;
        let out = self.nodes[i].value.map(ops::elu);
        Ok(self.push(Op::Elu(i), out, &[i]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        let out = ops::add(&self.nodes[ai].value, &self.nodes[bi].value)?;
        Ok(self.push(Op::Add(ai, bi), out, &[ai, bi]))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        let out = ops::sub(&self.nodes[ai].value, &self.nodes[bi].value)?;
        Ok(self.push(Op::Sub(ai, bi), out, &[ai, bi]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        let out = ops::mul(&self.nodes[ai].value, &self.nodes[bi].value)?;
        Ok(self.push(Op::Mul(ai, bi), out, &[ai, bi]))
    }

    /// `a / (b + eps)`.
    pub fn div_eps(&mut self, a: Var, b: Var, eps: f64) -> Result<Var> {
        let (ai, bi) = (self.idx(a)?, self.idx(b)?);
        let out = ops::div_eps(&self.nodes[ai].value, &self.nodes[bi].value, eps)?;
        Ok(self.push(Op::DivEps { a: ai, b: bi, eps }, out, &[ai, bi]))
    }

    /// Multiplies by a constant.
    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var> {
        let i = self.idx(x)?;
        let out = self.nodes[i].value.scale(c);
        Ok(self.push(Op::Scale(i, c), out, &[i]))
    }

    /// Elementwise square root of a nonnegative tensor. The derivative at
    /// exactly zero is taken as zero.
    pub fn sqrt(&mut self, x: Var) -> Result<Var> {
        let i = self.idx(x)?;
        let v = &self.nodes[i].value;
        if let Some(bad) = v.data().iter().position(|&e| e < 0.0) {
            return Err(TensorError::Dimension(format!(
                "sqrt of negative value at index {bad}"
            )));
        }
        let out = v.map(f64::sqrt);
        Ok(self.push(Op::Sqrt(i), out, &[i]))
    }

    pub fn concat_channels(&mut self, parts: &[Var]) -> Result<Var> {
        let idx = parts.iter().map(|&p| self.idx(p)).collect::<Result<Vec<_>>>()?;
        let values: Vec<&Tensor> = idx.iter().map(|&i| &self.nodes[i].value).collect();
        let out = ops::concat_channels(&values)?;
        Ok(self.push(Op::Concat(idx.clone()), out, &idx))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        let i = self.idx(x)?;
        let out = self.nodes[i].value.reshape(shape)?;
        Ok(self.push(Op::Reshape(i), out, &[i]))
    }

    /// Row-wise forward real FFT over the trailing axis.
    pub fn rfft(&mut self, x: Var) -> Result<ComplexVar> {
        let i = self.idx(x)?;
        let (re, im) = rfft_rows(&self.nodes[i].value)?;
        let re = self.push(Op::RfftRe(i), re, &[i]);
        let im = self.push(Op::RfftIm(i), im, &[i]);
        Ok(ComplexVar { re, im })
    }

    /// Row-wise inverse real FFT; imaginary parts of the boundary bins are
    /// treated as zero and receive zero gradient.
    pub fn irfft(&mut self, s: ComplexVar) -> Result<Var> {
        let (ri, ii) = (self.idx(s.re)?, self.idx(s.im)?);
        let out = irfft_rows(&self.nodes[ri].value, &self.nodes[ii].value)?;
        Ok(self.push(Op::Irfft { re: ri, im: ii }, out, &[ri, ii]))
    }

    /// One-sided rectangular periodogram `|X[k]|²/N` of each row.
    pub fn psd(&mut self, x: Var) -> Result<Var> {
        let n = self.value(x)?.last_dim() as f64;
        self.psd_normalized(x, n)
    }

    /// Periodogram of `window ⊙ x`, normalized by `Σ w²`.
    pub fn psd_windowed(&mut self, x: Var, window: fft::PsdWindow) -> Result<Var> {
        let n = self.value(x)?.last_dim();
        let w = window.coefficients(n);
        let norm = w.iter().map(|v| v * v).sum();
        let rows = self.value(x)?.rows();
        let shape = self.value(x)?.shape().to_vec();
        let tiled: Vec<f64> = (0..rows).flat_map(|_| w.iter().copied()).collect();
        let wv = self.input(Tensor::from_parts_unchecked(tiled, shape));
        let xw = self.mul(x, wv)?;
        self.psd_normalized(xw, norm)
    }

    fn psd_normalized(&mut self, x: Var, norm: f64) -> Result<Var> {
        let i = self.idx(x)?;
        let (re, im) = rfft_rows(&self.nodes[i].value)?;
        let out = re.zip_map(&im, |r, m| (r * r + m * m) / norm)?;
        Ok(self.push(Op::Psd { x: i, norm, re, im }, out, &[i]))
    }

    pub fn reduce(&mut self, x: Var, kind: ReduceKind) -> Result<Var> {
        let i = self.idx(x)?;
        let v = &self.nodes[i].value;
        let s = match kind {
            ReduceKind::Sum => v.sum(),
            ReduceKind::Mean => v.sum() / v.len() as f64,
            ReduceKind::SumSquares => v.sum_squares(),
        };
        let out = Tensor::from_parts_unchecked(vec![s], vec![1]);
        Ok(self.push(Op::Reduce(i, kind), out, &[i]))
    }

    pub fn sum(&mut self, x: Var) -> Result<Var> {
        self.reduce(x, ReduceKind::Sum)
    }

    pub fn mean(&mut self, x: Var) -> Result<Var> {
        self.reduce(x, ReduceKind::Mean)
    }

    pub fn sum_squares(&mut self, x: Var) -> Result<Var> {
        self.reduce(x, ReduceKind::SumSquares)
    }

    /// `Σ log(cosh(d_i))` as a scalar.
    pub fn log_cosh_sum(&mut self, d: Var) -> Result<Var> {
        let i = self.idx(d)?;
        let s = self.nodes[i].value.data().iter().map(|&v| ops::log_cosh(v)).sum();
        let out = Tensor::from_parts_unchecked(vec![s], vec![1]);
        Ok(self.push(Op::LogCoshSum(i), out, &[i]))
    }

    /// Reverse sweep from a scalar `loss`, returning gradients for every
    /// parameter recorded on this graph. Parameters the loss does not depend
    /// on get zero gradients.
    pub fn backward(&self, loss: Var) -> Result<GradientMap> {
        let li = self.idx(loss)?;
        if self.nodes[li].value.len() != 1 {
            return Err(TensorError::InvalidGraph(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[li].value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; li + 1];
        grads[li] = Some(Tensor::filled(self.nodes[li].value.shape(), 1.0));

        for i in (0..=li).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            if matches!(node.op, Op::Param) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads)?;
        }

        let grads = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.op, Op::Param))
            .map(|(i, n)| {
                let g = grads
                    .get_mut(i)
                    .and_then(Option::take)
                    .unwrap_or_else(|| Tensor::zeros(n.value.shape()));
                (i, g)
            })
            .collect();
        Ok(GradientMap {
            graph: self.id,
            grads,
        })
    }

    fn wants(&self, i: usize) -> bool {
        self.nodes[i].requires_grad
    }

    fn propagate(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) -> Result<()> {
        let val = |i: usize| &self.nodes[i].value;
        match &node.op {
            Op::Input | Op::Param => {}
            Op::Conv { input, kernels } => {
                let (c_in, _, _, k_len) = conv_dims(val(*input), val(*kernels))?;
                if self.wants(*input) {
                    accumulate(grads, *input, ops::conv1d_same_grad_input(val(*kernels), g, c_in));
                }
                if self.wants(*kernels) {
                    accumulate(grads, *kernels, ops::conv1d_same_grad_kernels(val(*input), g, k_len));
                }
            }
            Op::AddBias { x, bias } => {
                if self.wants(*x) {
                    accumulate(grads, *x, g.clone());
                }
                if self.wants(*bias) {
                    let l = g.last_dim();
                    let gb = g.data().chunks(l).map(|r| r.iter().sum()).collect();
                    accumulate(grads, *bias, Tensor::from_parts_unchecked(gb, vec![g.rows()]));
                }
            }
            Op::Tanh(x) => {
                let d = node.value.zip_map(g, |y, gy| gy * (1.0 - y * y))?;
                accumulate(grads, *x, d);
            }
            Op::Elu(x) => {
                let d = val(*x).zip_map(g, |v, gy| gy * ops::elu_grad(v))?;
                accumulate(grads, *x, d);
            }
            Op::Add(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.clone());
                }
                if self.wants(*b) {
                    accumulate(grads, *b, g.clone());
                }
            }
            Op::Sub(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.clone());
                }
                if self.wants(*b) {
                    accumulate(grads, *b, g.scale(-1.0));
                }
            }
            Op::Mul(a, b) => {
                if self.wants(*a) {
                    accumulate(grads, *a, g.zip_map(val(*b), |gy, bv| gy * bv)?);
                }
                if self.wants(*b) {
                    accumulate(grads, *b, g.zip_map(val(*a), |gy, av| gy * av)?);
                }
            }
            Op::DivEps { a, b, eps } => {
                let denom = val(*b).map(|v| v + eps);
                if self.wants(*a) {
                    accumulate(grads, *a, g.zip_map(&denom, |gy, d| gy / d)?);
                }
                if self.wants(*b) {
                    let q = node.value.zip_map(&denom, |q, d| q / d)?;
                    accumulate(grads, *b, g.zip_map(&q, |gy, q| -gy * q)?);
                }
            }
            Op::Scale(x, c) => accumulate(grads, *x, g.scale(*c)),
            Op::Sqrt(x) => {
                let d = node
                    .value
                    .zip_map(g, |s, gy| if s > 0.0 { gy / (2.0 * s) } else { 0.0 })?;
                accumulate(grads, *x, d);
            }
            Op::Concat(parts) => {
                let f = g.last_dim();
                let mut offset = 0;
                for &p in parts {
                    let len = val(p).len();
                    if self.wants(p) {
                        let slice = g.data()[offset..offset + len].to_vec();
                        accumulate(grads, p, Tensor::from_parts_unchecked(slice, vec![len / f, f]));
                    }
                    offset += len;
                }
            }
            Op::Reshape(x) => accumulate(grads, *x, g.reshape(val(*x).shape())?),
            Op::RfftRe(x) => {
                let n = val(*x).last_dim();
                let zero = Tensor::zeros(g.shape());
                accumulate(grads, *x, fft::rfft_rows_adjoint(g, &zero, n));
            }
            Op::RfftIm(x) => {
                let n = val(*x).last_dim();
                let zero = Tensor::zeros(g.shape());
                accumulate(grads, *x, fft::rfft_rows_adjoint(&zero, g, n));
            }
            Op::Irfft { re, im } => {
                let (gre, gim) = fft::irfft_rows_adjoint(g);
                if self.wants(*re) {
                    accumulate(grads, *re, gre);
                }
                if self.wants(*im) {
                    accumulate(grads, *im, gim);
                }
            }
            Op::Psd { x, norm, re, im } => {
                let c = 2.0 / norm;
                let gre = re.zip_map(g, |r, gy| c * r * gy)?;
                let gim = im.zip_map(g, |m, gy| c * m * gy)?;
                let n = val(*x).last_dim();
                debug_assert_eq!(half_len(n), g.last_dim());
                accumulate(grads, *x, fft::rfft_rows_adjoint(&gre, &gim, n));
            }
            Op::Reduce(x, kind) => {
                let gs = g.data()[0];
                let v = val(*x);
                let d = match kind {
                    ReduceKind::Sum => Tensor::filled(v.shape(), gs),
                    ReduceKind::Mean => Tensor::filled(v.shape(), gs / v.len() as f64),
                    ReduceKind::SumSquares => v.scale(2.0 * gs),
                };
                accumulate(grads, *x, d);
            }
            Op::LogCoshSum(x) => {
                let gs = g.data()[0];
                accumulate(grads, *x, val(*x).map(|d| gs * d.tanh()));
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Tensor>], i: usize, g: Tensor) {
    match &mut grads[i] {
        Some(acc) => acc.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Tensor {
        Tensor::vector(data.to_vec()).unwrap()
    }

    #[test]
    fn sum_and_sum_squares_grads() {
        let mut g = Graph::new();
        let th = g.param(v(&[1.0, 2.0]));
        let l = g.sum(th).unwrap();
        assert_eq!(g.backward(l).unwrap().get(th).unwrap().data(), &[1.0, 1.0]);

        let mut g = Graph::new();
        let th = g.param(v(&[3.0]));
        let l = g.sum_squares(th).unwrap();
        assert_eq!(g.value(l).unwrap().item(), Some(9.0));
        assert_eq!(g.backward(l).unwrap().get(th).unwrap().data(), &[6.0]);
    }

    #[test]
    fn mul_product_rule() {
        let mut g = Graph::new();
        let a = g.param(v(&[2.0]));
        let b = g.param(v(&[3.0]));
        let p = g.mul(a, b).unwrap();
        let l = g.sum(p).unwrap();
        let grads = g.backward(l).unwrap();
        assert_eq!(grads.get(a).unwrap().data(), &[3.0]);
        assert_eq!(grads.get(b).unwrap().data(), &[2.0]);
    }

    #[test]
    fn untouched_param_gets_zero() {
        let mut g = Graph::new();
        let a = g.param(v(&[2.0, 5.0]));
        let unused = g.param(v(&[1.0, 1.0, 1.0]));
        let l = g.mean(a).unwrap();
        let grads = g.backward(l).unwrap();
        assert_eq!(grads.len(), 2);
        assert_eq!(grads.get(unused).unwrap().data(), &[0.0, 0.0, 0.0]);
        assert_eq!(grads.get(a).unwrap().data(), &[0.5, 0.5]);
    }

    #[test]
    fn foreign_loss_rejected() {
        let mut g1 = Graph::new();
        let mut g2 = Graph::new();
        let a = g1.param(v(&[1.0]));
        let l1 = g1.sum(a).unwrap();
        let b = g2.param(v(&[1.0]));
        let _ = g2.sum(b).unwrap();
        assert!(matches!(g2.backward(l1), Err(TensorError::InvalidGraph(_))));
        assert!(matches!(g2.tanh(a), Err(TensorError::InvalidGraph(_))));
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut g = Graph::new();
        let a = g.param(v(&[1.0, 2.0]));
        assert!(matches!(g.backward(a), Err(TensorError::InvalidGraph(_))));
    }

    #[test]
    fn forward_values() {
        let mut g = Graph::new();
        let x = g.input(v(&[0.0, 0.5, 100.0]));
        let t = g.tanh(x).unwrap();
        let tv = g.value(t).unwrap().data().to_vec();
        assert_eq!(tv[0], 0.0);
        assert!((tv[1] - 0.462_117_157_260_009_8).abs() < 1e-15);
        assert!((1.0 - tv[2]).abs() < 1e-12);

        let x = g.input(v(&[1.0, 1.0, 1.0, 1.0]));
        let p = g.psd(x).unwrap();
        assert_eq!(g.value(p).unwrap().data(), &[4.0, 0.0, 0.0]);
    }

    #[test]
    fn replay_is_bit_identical() {
        let run = || {
            let mut g = Graph::new();
            let x = g.input(Tensor::new((0..16).map(|i| (i as f64).sin()).collect(), vec![1, 16]).unwrap());
            let w = g.param(Tensor::new((0..15).map(|i| (i as f64).cos()).collect(), vec![1, 1, 15]).unwrap());
            let y = g.conv1d_same(x, w).unwrap();
            let y = g.tanh(y).unwrap();
            let p = g.psd(y).unwrap();
            g.value(p).unwrap().clone()
        };
        assert_eq!(run(), run());
    }
}
