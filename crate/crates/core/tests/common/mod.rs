//! Shared fixtures and brute-force oracles for the integration tests.

#![allow(dead_code)]

pub mod ops;

use std::f64::consts::PI;

use freqdenoise::model::ModelConfig;
use freqdenoise::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new((0..n).map(|_| rng.random_range(lo..hi)).collect(), shape.to_vec()).unwrap()
}

/// Uniform in `±[lo, hi]`, keeping values away from zero.
pub fn away_from_zero(rng: &mut ChaCha8Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    let v = (0..n)
        .map(|_| {
            let m = rng.random_range(lo..hi);
            if rng.random_bool(0.5) { m } else { -m }
        })
        .collect();
    Tensor::new(v, shape.to_vec()).unwrap()
}

/// Small architecture for gradient and oracle tests.
pub fn small_config(n: usize) -> ModelConfig {
    ModelConfig {
        signal_length: n,
        steps: 2,
        channel_progression: vec![1, 2, 1],
        branch_layers: 2,
        branch_hidden_channels: 3,
        branch_kernel_size: 3,
        epsilon_ratio: 1e-8,
    }
}

/// `O(N²)` DFT of a real signal, bins `0..=N/2`.
pub fn direct_rdft(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, &v)| {
                let a = -2.0 * PI * (k * t) as f64 / n as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .unzip()
}

/// Direct inverse of a Hermitian half-spectrum; the boundary imaginary
/// parts are ignored.
pub fn direct_irdft(re: &[f64], im: &[f64]) -> Vec<f64> {
    let f = re.len();
    let n = 2 * (f - 1);
    (0..n)
        .map(|t| {
            let mut s = re[0] + re[f - 1] * if t % 2 == 0 { 1.0 } else { -1.0 };
            for k in 1..f - 1 {
                let a = 2.0 * PI * (k * t) as f64 / n as f64;
                s += 2.0 * (re[k] * a.cos() - im[k] * a.sin());
            }
            s / n as f64
        })
        .collect()
}

pub fn direct_periodogram(x: &[f64]) -> Vec<f64> {
    let (re, im) = direct_rdft(x);
    re.iter().zip(&im).map(|(r, i)| (r * r + i * i) / x.len() as f64).collect()
}

/// Same-padded cross-correlation by explicit loops: input `[C_in][N]`,
/// kernels `[C_out][C_in][K]`, left offset `⌊(K−1)/2⌋`.
pub fn brute_conv(input: &[Vec<f64>], kernels: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let n = input[0].len();
    kernels
        .iter()
        .map(|per_in| {
            (0..n)
                .map(|t| {
                    let mut s = 0.0;
                    for (c, k) in per_in.iter().enumerate() {
                        let off = (k.len() - 1) / 2;
                        for (j, w) in k.iter().enumerate() {
                            let idx = t as isize + j as isize - off as isize;
                            if idx >= 0 && (idx as usize) < n {
                                s += w * input[c][idx as usize];
                            }
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
