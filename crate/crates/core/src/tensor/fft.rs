//! Radix-2 FFT and the real-signal transform pair used by the model.
//!
//! Conventions: the forward transform is unnormalized,
//! `X[k] = Σ x[n]·e^(−i2πkn/N)`, and the inverse carries the `1/N` factor.
//! Only even power-of-two lengths ≥ 4 are supported.
//!
//! The half-spectrum of a length-`N` real signal has `F = N/2 + 1` bins. When
//! a half-spectrum is turned back into a real signal, the imaginary parts of
//! bin 0 and bin `N/2` are ignored (treated as zero), which is what makes the
//! conjugate-symmetric extension real-valued.

use std::f64::consts::PI;

use super::{Result, Tensor, TensorError};

pub fn check_signal_len(n: usize) -> Result<()> {
    if n >= 4 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(TensorError::UnsupportedLength(n))
    }
}

/// Number of half-spectrum bins for a real signal of length `n`.
pub fn half_len(n: usize) -> usize {
    n / 2 + 1
}

/// Signal length reconstructed from `f` half-spectrum bins.
pub fn full_len(f: usize) -> usize {
    2 * (f.saturating_sub(1))
}

/// Precomputed twiddles and bit-reversal table for one transform length.
#[derive(Debug, Clone)]
pub struct Radix2Plan {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    bitrev: Vec<usize>,
}

impl Radix2Plan {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(TensorError::UnsupportedLength(n));
        }
        let half = n / 2;
        let (cos, sin) = (0..half)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Ok(Self {
            n,
            cos,
            sin,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unnormalized transform. `inverse` flips the exponent sign to
    /// `+i`; no `1/N` is applied.
    pub fn process(&self, re: &mut [f64], im: &mut [f64], inverse: bool) {
        let n = self.n;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if j > i {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let sign = if inverse { 1.0 } else { -1.0 };
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let wr = self.cos[j * stride];
                    let wi = sign * self.sin[j * stride];
                    let a = start + j;
                    let b = a + half;
                    let tr = re[b] * wr - im[b] * wi;
                    let ti = re[b] * wi + im[b] * wr;
                    re[b] = re[a] - tr;
                    im[b] = im[a] - ti;
                    re[a] += tr;
                    im[a] += ti;
                }
            }
            size *= 2;
        }
    }
}

/// Forward half-spectrum of one real signal.
pub fn rfft(x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_signal_len(x.len())?;
    let plan = Radix2Plan::new(x.len())?;
    let mut scratch = Scratch::new(x.len());
    let f = half_len(x.len());
    let (mut re, mut im) = (vec![0.0; f], vec![0.0; f]);
    rfft_into(&plan, &mut scratch, x, &mut re, &mut im);
    Ok((re, im))
}

/// Inverse of [`rfft`]; boundary imaginary parts are ignored.
pub fn irfft(re: &[f64], im: &[f64]) -> Result<Vec<f64>> {
    if re.len() != im.len() || re.len() < 3 {
        return Err(TensorError::Dimension(format!(
            "half-spectrum needs matching re/im with at least 3 bins, got {} and {}",
            re.len(),
            im.len()
        )));
    }
    let n = full_len(re.len());
    check_signal_len(n)?;
    let plan = Radix2Plan::new(n)?;
    let mut scratch = Scratch::new(n);
    let mut out = vec![0.0; n];
    irfft_into(&plan, &mut scratch, re, im, &mut out);
    Ok(out)
}

/// Rectangular-window periodogram: `S[k] = |X[k]|² / N`.
pub fn periodogram(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len() as f64;
    let (re, im) = rfft(x)?;
    Ok(re.iter().zip(&im).map(|(r, i)| (r * r + i * i) / n).collect())
}

/// Window applied before the periodogram transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsdWindow {
    #[default]
    Rectangular,
    Hann,
}

impl PsdWindow {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            PsdWindow::Rectangular => vec![1.0; n],
            // periodic Hann
            PsdWindow::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// Periodogram with an optional window, normalized by `Σ w²` so that the
/// rectangular case reduces to [`periodogram`].
pub fn periodogram_windowed(x: &[f64], window: PsdWindow) -> Result<Vec<f64>> {
    let w = window.coefficients(x.len());
    let norm: f64 = w.iter().map(|v| v * v).sum();
    let xw: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
    let (re, im) = rfft(&xw)?;
    Ok(re
        .iter()
        .zip(&im)
        .map(|(r, i)| (r * r + i * i) / norm)
        .collect())
}

pub(crate) struct Scratch {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }
}

pub(crate) fn rfft_into(
    plan: &Radix2Plan,
    s: &mut Scratch,
    x: &[f64],
    re: &mut [f64],
    im: &mut [f64],
) {
    s.re.copy_from_slice(x);
    s.im.iter_mut().for_each(|v| *v = 0.0);
    plan.process(&mut s.re, &mut s.im, false);
    let f = re.len();
    re.copy_from_slice(&s.re[..f]);
    im.copy_from_slice(&s.im[..f]);
}

pub(crate) fn irfft_into(
    plan: &Radix2Plan,
    s: &mut Scratch,
    re: &[f64],
    im: &[f64],
    out: &mut [f64],
) {
    let n = plan.len();
    let f = re.len();
    s.re[0] = re[0];
    s.im[0] = 0.0;
    s.re[f - 1] = re[f - 1];
    s.im[f - 1] = 0.0;
    for k in 1..f - 1 {
        s.re[k] = re[k];
        s.im[k] = im[k];
        s.re[n - k] = re[k];
        s.im[n - k] = -im[k];
    }
    plan.process(&mut s.re, &mut s.im, true);
    let scale = 1.0 / n as f64;
    for (o, v) in out.iter_mut().zip(&s.re) {
        *o = v * scale;
    }
}

/// Adjoint of the forward half-spectrum map: given cotangents on `re`/`im`,
/// returns the cotangent on the signal, `Re Σ_{k<F} (gre_k + i·gim_k)·e^(i2πkn/N)`.
pub(crate) fn rfft_adjoint_into(
    plan: &Radix2Plan,
    s: &mut Scratch,
    gre: &[f64],
    gim: &[f64],
    out: &mut [f64],
) {
    let f = gre.len();
    s.re.iter_mut().for_each(|v| *v = 0.0);
    s.im.iter_mut().for_each(|v| *v = 0.0);
    s.re[..f].copy_from_slice(gre);
    s.im[..f].copy_from_slice(gim);
    plan.process(&mut s.re, &mut s.im, true);
    out.copy_from_slice(&s.re);
}

/// Adjoint of [`irfft_into`]: `w_k/N · rfft(g)_k` with `w = 1` at the
/// boundary bins and `2` elsewhere; boundary imaginary cotangents are zero.
pub(crate) fn irfft_adjoint_into(
    plan: &Radix2Plan,
    s: &mut Scratch,
    g: &[f64],
    gre: &mut [f64],
    gim: &mut [f64],
) {
    rfft_into(plan, s, g, gre, gim);
    let n = plan.len() as f64;
    let f = gre.len();
    for k in 0..f {
        let w = if k == 0 || k == f - 1 { 1.0 } else { 2.0 } / n;
        gre[k] *= w;
        gim[k] *= w;
    }
    gim[0] = 0.0;
    gim[f - 1] = 0.0;
}

/// Row-wise forward transform of a `[.., N]` tensor into `[.., F]` re/im parts.
pub fn rfft_rows(x: &Tensor) -> Result<(Tensor, Tensor)> {
    let n = x.last_dim();
    check_signal_len(n)?;
    let plan = Radix2Plan::new(n)?;
    let mut s = Scratch::new(n);
    let f = half_len(n);
    let rows = x.rows();
    let mut re = vec![0.0; rows * f];
    let mut im = vec![0.0; rows * f];
    for r in 0..rows {
        rfft_into(
            &plan,
            &mut s,
            &x.data()[r * n..(r + 1) * n],
            &mut re[r * f..(r + 1) * f],
            &mut im[r * f..(r + 1) * f],
        );
    }
    let mut shape = x.shape().to_vec();
    *shape.last_mut().unwrap() = f;
    Ok((
        Tensor::from_parts_unchecked(re, shape.clone()),
        Tensor::from_parts_unchecked(im, shape),
    ))
}

/// Row-wise inverse transform of `[.., F]` half-spectra into `[.., N]` signals.
pub fn irfft_rows(re: &Tensor, im: &Tensor) -> Result<Tensor> {
    super::ensure_same_shape(re, im)?;
    let f = re.last_dim();
    if f < 3 {
        return Err(TensorError::Dimension(format!(
            "half-spectrum needs at least 3 bins, got {f}"
        )));
    }
    let n = full_len(f);
    check_signal_len(n)?;
    let plan = Radix2Plan::new(n)?;
    let mut s = Scratch::new(n);
    let rows = re.rows();
    let mut out = vec![0.0; rows * n];
    for r in 0..rows {
        irfft_into(
            &plan,
            &mut s,
            &re.data()[r * f..(r + 1) * f],
            &im.data()[r * f..(r + 1) * f],
            &mut out[r * n..(r + 1) * n],
        );
    }
    let mut shape = re.shape().to_vec();
    *shape.last_mut().unwrap() = n;
    Ok(Tensor::from_parts_unchecked(out, shape))
}

pub(crate) fn rfft_rows_adjoint(gre: &Tensor, gim: &Tensor, n: usize) -> Tensor {
    let plan = Radix2Plan::new(n).expect("length validated in forward pass");
    let mut s = Scratch::new(n);
    let f = gre.last_dim();
    let rows = gre.rows();
    let mut out = vec![0.0; rows * n];
    for r in 0..rows {
        rfft_adjoint_into(
            &plan,
            &mut s,
            &gre.data()[r * f..(r + 1) * f],
            &gim.data()[r * f..(r + 1) * f],
            &mut out[r * n..(r + 1) * n],
        );
    }
    let mut shape = gre.shape().to_vec();
    *shape.last_mut().unwrap() = n;
    Tensor::from_parts_unchecked(out, shape)
}

pub(crate) fn irfft_rows_adjoint(g: &Tensor) -> (Tensor, Tensor) {
    let n = g.last_dim();
    let plan = Radix2Plan::new(n).expect("length validated in forward pass");
    let mut s = Scratch::new(n);
    let f = half_len(n);
    let rows = g.rows();
    let mut gre = vec![0.0; rows * f];
    let mut gim = vec![0.0; rows * f];
    for r in 0..rows {
        irfft_adjoint_into(
            &plan,
            &mut s,
            &g.data()[r * n..(r + 1) * n],
            &mut gre[r * f..(r + 1) * f],
            &mut gim[r * f..(r + 1) * f],
        );
    }
    let mut shape = g.shape().to_vec();
    *shape.last_mut().unwrap() = f;
    (
        Tensor::from_parts_unchecked(gre, shape.clone()),
        Tensor::from_parts_unchecked(gim, shape),
    )
}

/// Same-padded cross-correlation computed through zero-padded FFTs.
///
/// Produces the same result as [`super::ops::conv1d_same`] up to rounding;
/// not differentiable and not used on the training path.
pub fn conv1d_same_fft(input: &Tensor, kernels: &Tensor) -> Result<Tensor> {
    let (c_in, n, c_out, k) = super::ops::conv_dims(input, kernels)?;
    let off = (k - 1) / 2;
    let len = (n + k - 1).next_power_of_two().max(2);
    let plan = Radix2Plan::new(len)?;
    let spectra_in: Vec<(Vec<f64>, Vec<f64>)> = (0..c_in)
        .map(|i| {
            let mut re = vec![0.0; len];
            let mut im = vec![0.0; len];
            re[..n].copy_from_slice(&input.data()[i * n..(i + 1) * n]);
            plan.process(&mut re, &mut im, false);
            (re, im)
        })
        .collect();
    let mut out = vec![0.0; c_out * n];
    for c in 0..c_out {
        let mut acc_re = vec![0.0; len];
        let mut acc_im = vec![0.0; len];
        for (i, (xr, xi)) in spectra_in.iter().enumerate() {
            let w = &kernels.data()[(c * c_in + i) * k..(c * c_in + i + 1) * k];
            let mut re = vec![0.0; len];
            let mut im = vec![0.0; len];
            for (j, &v) in w.iter().rev().enumerate() {
                re[j] = v;
            }
            plan.process(&mut re, &mut im, false);
            for b in 0..len {
                acc_re[b] += xr[b] * re[b] - xi[b] * im[b];
                acc_im[b] += xr[b] * im[b] + xi[b] * re[b];
            }
        }
        plan.process(&mut acc_re, &mut acc_im, true);
        let scale = 1.0 / len as f64;
        for t in 0..n {
            out[c * n + t] = acc_re[t + k - 1 - off] * scale;
        }
    }
    Ok(Tensor::from_parts_unchecked(out, vec![c_out, n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct O(N²) DFT, half-spectrum only.
    fn dft_half(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                x.iter().enumerate().fold((0.0, 0.0), |(r, i), (t, &v)| {
                    let a = -2.0 * PI * (k * t) as f64 / n as f64;
                    (r + v * a.cos(), i + v * a.sin())
                })
            })
            .unzip()
    }

    fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn dc_only() {
        let (re, im) = rfft(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(re, vec![4.0, 0.0, 0.0]);
        assert_eq!(im, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn quarter_cosine() {
        let x = [1.0, 0.0, -1.0, 0.0];
        let (re, im) = rfft(&x).unwrap();
        let (ore, oim) = dft_half(&x);
        for k in 0..3 {
            assert!((re[k] - ore[k]).abs() < 1e-12);
            assert!((im[k] - oim[k]).abs() < 1e-12);
        }
        assert!((re[1] - 2.0).abs() < 1e-12);
        assert_eq!(irfft(&[4.0, 0.0, 0.0], &[0.0; 3]).unwrap(), vec![1.0; 4]);
        let back = irfft(&[0.0, 2.0, 0.0], &[0.0; 3]).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_direct_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4, 8, 64, 512] {
            let x = random_signal(&mut rng, n);
            let (re, im) = rfft(&x).unwrap();
            let (ore, oim) = dft_half(&x);
            for k in 0..re.len() {
                assert!((re[k] - ore[k]).abs() < 1e-9, "n={n} k={k}");
                assert!((im[k] - oim[k]).abs() < 1e-9, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [8, 64, 512] {
            let x = random_signal(&mut rng, n);
            let (re, im) = rfft(&x).unwrap();
            let back = irfft(&re, &im).unwrap();
            let err = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-10, "n={n} err={err}");
        }
    }

    #[test]
    fn boundary_imag_ignored() {
        let a = irfft(&[1.0, 0.5, 0.25, -0.5, 2.0], &[0.0, 0.3, -0.2, 0.1, 0.0]).unwrap();
        let b = irfft(&[1.0, 0.5, 0.25, -0.5, 2.0], &[9.0, 0.3, -0.2, 0.1, -4.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert_eq!(rfft(&[1.0; 6]).unwrap_err(), TensorError::UnsupportedLength(6));
        assert_eq!(rfft(&[1.0; 7]).unwrap_err(), TensorError::UnsupportedLength(7));
        assert!(rfft(&[1.0; 2]).is_err());
        assert!(irfft(&[1.0; 4], &[0.0; 4]).is_err());
    }

    #[test]
    fn periodogram_fixtures() {
        assert_eq!(periodogram(&[1.0; 4]).unwrap(), vec![4.0, 0.0, 0.0]);
        let p = periodogram(&[1.0, 0.0, -1.0, 0.0]).unwrap();
        assert!((p[0]).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-12 && p[2].abs() < 1e-15);
        let hann = periodogram_windowed(&[1.0, 0.0, -1.0, 0.0], PsdWindow::Rectangular).unwrap();
        assert_eq!(hann, p);
    }

    #[test]
    fn fft_conv_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (c_in, c_out, n, k) in [(1, 1, 16, 3), (2, 3, 32, 7), (1, 8, 64, 64), (3, 2, 8, 15)] {
            let x = Tensor::vector(random_signal(&mut rng, c_in * n))
                .unwrap()
                .reshape(&[c_in, n])
                .unwrap();
            let w = Tensor::vector(random_signal(&mut rng, c_out * c_in * k))
                .unwrap()
                .reshape(&[c_out, c_in, k])
                .unwrap();
            let direct = crate::tensor::ops::conv1d_same(&x, &w).unwrap();
            let fast = conv1d_same_fft(&x, &w).unwrap();
            let scale = direct.max_abs().max(1e-12);
            for (a, b) in direct.data().iter().zip(fast.data()) {
                assert!((a - b).abs() / scale < 1e-5);
            }
        }
    }
}
