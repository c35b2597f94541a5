//! Dense row-major arrays with a small reverse-mode autodiff graph.
//!
//! All arithmetic runs in `f64`. Values are immutable once built; every
//! operation returns a fresh [`Tensor`]. Differentiable operations live on
//! [`Graph`], which records them on a tape and replays the tape backwards in
//! [`Graph::backward`].
//!
//! The operation set is deliberately narrow: exactly what the denoising model
//! and its loss need (same-padded 1D convolution, `tanh`, ELU, elementwise
//! arithmetic, channel concatenation, real FFT pair, periodogram and scalar
//! reductions).

pub mod fft;
mod gradcheck;
mod graph;
pub mod ops;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gradcheck::{grad_check, GradCheckReport};
pub use graph::{ComplexVar, GradientMap, Graph, ReduceKind, Var};

/// Errors raised by tensor construction and tensor operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("unsupported transform length {0}: expected an even power of two >= 4")]
    UnsupportedLength(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Numeric precision tag carried in file headers.
///
/// In-memory computation is always `f64`; `F32` marks buffers that are stored
/// narrow on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor from external data, rejecting NaN/Inf and shapes whose
    /// element count does not match the buffer.
    pub fn new(data: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite { index });
        }
        Self::from_parts(data, shape)
    }

    /// Like [`Tensor::new`] but skips the finiteness scan. Used for internal
    /// results whose inputs were already validated.
    pub(crate) fn from_parts(data: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(TensorError::Dimension(format!(
                "shape {shape:?} has a zero dimension"
            )));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(TensorError::Dimension(format!(
                "shape {shape:?} holds {n} elements but buffer has {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub(crate) fn from_parts_unchecked(data: Vec<f64>, shape: Vec<usize>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn vector(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::new(data, vec![n])
    }

    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1])
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Length of the trailing axis.
    pub fn last_dim(&self) -> usize {
        *self.shape.last().expect("tensor shapes are never empty")
    }

    /// Number of rows when viewed as `[rows, last_dim]`.
    pub fn rows(&self) -> usize {
        self.data.len() / self.last_dim()
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> Option<f64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        Self::from_parts(self.data.clone(), shape.to_vec())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_shape(self, other)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// In-place `self += other`; shapes must match.
    pub(crate) fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

pub(crate) fn ensure_same_shape(a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape != b.shape {
        return Err(TensorError::Dimension(format!(
            "shape mismatch {:?} vs {:?}",
            a.shape, b.shape
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            Tensor::vector(vec![1.0, f64::NAN]).unwrap_err(),
            TensorError::NonFinite { index: 1 }
        );
        assert!(Tensor::vector(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(matches!(
            Tensor::new(vec![1.0, 2.0, 3.0], vec![2, 2]),
            Err(TensorError::Dimension(_))
        ));
        assert!(Tensor::new(vec![], vec![0]).is_err());
    }

    #[test]
    fn rows_view() {
        let t = Tensor::zeros(&[3, 2, 5]);
        assert_eq!(t.last_dim(), 5);
        assert_eq!(t.rows(), 6);
    }
}
