//! Forward kernels and their hand-written adjoints.
//!
//! These are plain functions over [`Tensor`] values; [`super::Graph`] wires
//! them into the tape. Metrics and baselines call them directly.

use super::{ensure_same_shape, Result, Tensor, TensorError};

/// Validates a `[C_in, N]` input against `[C_out, C_in, K]` kernels and
/// returns `(C_in, N, C_out, K)`.
pub(crate) fn conv_dims(input: &Tensor, kernels: &Tensor) -> Result<(usize, usize, usize, usize)> {
    let (&[c_in, n], &[c_out, kc_in, k]) = (input.shape(), kernels.shape()) else {
        return Err(TensorError::Dimension(format!(
            "conv1d expects input [C_in, N] and kernels [C_out, C_in, K], got {:?} and {:?}",
            input.shape(),
            kernels.shape()
        )));
    };
    if kc_in != c_in {
        return Err(TensorError::Dimension(format!(
            "conv1d input has {c_in} channels but kernels expect {kc_in}"
        )));
    }
    if k > 2 * n - 1 {
        return Err(TensorError::Dimension(format!(
            "kernel length {k} exceeds 2N-1 for N = {n}"
        )));
    }
    Ok((c_in, n, c_out, k))
}

/// Valid output range `[lo, hi)` for tap `k` and the input offset of that tap.
#[inline]
fn tap_range(n: usize, off: usize, k: usize) -> (usize, usize, isize) {
    let shift = k as isize - off as isize;
    let lo = (-shift).max(0) as usize;
    let hi = (n as isize - shift).min(n as isize).max(lo as isize) as usize;
    (lo, hi, shift)
}

/// Same-padded 1D cross-correlation.
///
/// `out[c, t] = Σ_{i,k} input[i, t + k − ⌊(K−1)/2⌋] · kernels[c, i, k]`, with
/// samples outside `[0, N)` read as zero. For even `K` the extra padding
/// falls on the right.
pub fn conv1d_same(input: &Tensor, kernels: &Tensor) -> Result<Tensor> {
    let (c_in, n, c_out, k_len) = conv_dims(input, kernels)?;
    let off = (k_len - 1) / 2;
    let x = input.data();
    let w = kernels.data();
    let mut out = vec![0.0; c_out * n];
    for c in 0..c_out {
        let dst = &mut out[c * n..(c + 1) * n];
        for i in 0..c_in {
            let src = &x[i * n..(i + 1) * n];
            let taps = &w[(c * c_in + i) * k_len..(c * c_in + i + 1) * k_len];
            for (k, &wk) in taps.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let (lo, hi, shift) = tap_range(n, off, k);
                let s_lo = (lo as isize + shift) as usize;
                let s = &src[s_lo..s_lo + (hi - lo)];
                for (d, v) in dst[lo..hi].iter_mut().zip(s) {
                    *d += wk * v;
                }
            }
        }
    }
    Ok(Tensor::from_parts_unchecked(out, vec![c_out, n]))
}

/// Cotangent of [`conv1d_same`] with respect to its input.
pub(crate) fn conv1d_same_grad_input(kernels: &Tensor, grad_out: &Tensor, c_in: usize) -> Tensor {
    let (c_out, n) = (grad_out.shape()[0], grad_out.shape()[1]);
    let k_len = kernels.shape()[2];
    let off = (k_len - 1) / 2;
    let w = kernels.data();
    let g = grad_out.data();
    let mut gin = vec![0.0; c_in * n];
    for c in 0..c_out {
        let gsrc = &g[c * n..(c + 1) * n];
        for i in 0..c_in {
            let dst = &mut gin[i * n..(i + 1) * n];
            let taps = &w[(c * c_in + i) * k_len..(c * c_in + i + 1) * k_len];
            for (k, &wk) in taps.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let (lo, hi, shift) = tap_range(n, off, k);
                let d_lo = (lo as isize + shift) as usize;
                for (d, v) in dst[d_lo..d_lo + (hi - lo)].iter_mut().zip(&gsrc[lo..hi]) {
                    *d += wk * v;
                }
            }
        }
    }
    Tensor::from_parts_unchecked(gin, vec![c_in, n])
}

/// Cotangent of [`conv1d_same`] with respect to its kernels.
pub(crate) fn conv1d_same_grad_kernels(input: &Tensor, grad_out: &Tensor, k_len: usize) -> Tensor {
    let (c_in, n) = (input.shape()[0], input.shape()[1]);
    let c_out = grad_out.shape()[0];
    let off = (k_len - 1) / 2;
    let x = input.data();
    let g = grad_out.data();
    let mut gk = vec![0.0; c_out * c_in * k_len];
    for c in 0..c_out {
        let gsrc = &g[c * n..(c + 1) * n];
        for i in 0..c_in {
            let src = &x[i * n..(i + 1) * n];
            let dst = &mut gk[(c * c_in + i) * k_len..(c * c_in + i + 1) * k_len];
            for (k, d) in dst.iter_mut().enumerate() {
                let (lo, hi, shift) = tap_range(n, off, k);
                let s_lo = (lo as isize + shift) as usize;
                *d = gsrc[lo..hi]
                    .iter()
                    .zip(&src[s_lo..s_lo + (hi - lo)])
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
    }
    Tensor::from_parts_unchecked(gk, vec![c_out, c_in, k_len])
}

/// Adds `bias[c]` to every element of row `c` of a `[C, L]` tensor.
pub fn add_channel_bias(x: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let &[c, l] = x.shape() else {
        return Err(TensorError::Dimension(format!(
            "channel bias expects [C, L], got {:?}",
            x.shape()
        )));
    };
    if bias.shape() != [c] {
        return Err(TensorError::Dimension(format!(
            "bias shape {:?} does not match {c} channels",
            bias.shape()
        )));
    }
    let mut out = x.data().to_vec();
    for (row, &b) in out.chunks_mut(l).zip(bias.data()) {
        row.iter_mut().for_each(|v| *v += b);
    }
    Ok(Tensor::from_parts_unchecked(out, vec![c, l]))
}

pub fn elu(v: f64) -> f64 {
    if v >= 0.0 {
        v
    } else {
        v.exp_m1()
    }
}

/// ELU derivative; 1 at exactly zero.
pub fn elu_grad(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        v.exp()
    }
}

/// `log(cosh(d))` without overflow or cancellation near zero.
pub fn log_cosh(d: f64) -> f64 {
    let a = d.abs();
    if a < 1.0 {
        // cosh(a) − 1 = 2·sinh²(a/2) keeps tiny differences from cancelling
        let s = (0.5 * a).sinh();
        (2.0 * s * s).ln_1p()
    } else {
        a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
    }
}

/// Stacks `[C_i, F]` parts along the channel axis.
pub fn concat_channels(parts: &[&Tensor]) -> Result<Tensor> {
    let first = parts
        .first()
        .ok_or_else(|| TensorError::Dimension("concat of zero parts".into()))?;
    let f = first.last_dim();
    let mut channels = 0;
    let mut data = Vec::new();
    for p in parts {
        let &[c, pf] = p.shape() else {
            return Err(TensorError::Dimension(format!(
                "concat expects [C, F] parts, got {:?}",
                p.shape()
            )));
        };
        if pf != f {
            return Err(TensorError::Dimension(format!(
                "concat trailing length {pf} differs from {f}"
            )));
        }
        channels += c;
        data.extend_from_slice(p.data());
    }
    Ok(Tensor::from_parts_unchecked(data, vec![channels, f]))
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.zip_map(b, |x, y| x + y)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.zip_map(b, |x, y| x - y)
}

pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.zip_map(b, |x, y| x * y)
}

/// `a / (b + eps)`.
pub fn div_eps(a: &Tensor, b: &Tensor, eps: f64) -> Result<Tensor> {
    if !(eps > 0.0) {
        return Err(TensorError::Dimension(format!(
            "div_eps requires eps > 0, got {eps}"
        )));
    }
    ensure_same_shape(a, b)?;
    a.zip_map(b, |x, y| x / (y + eps))
}
