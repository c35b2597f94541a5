use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::tensor::{fft, Graph, Tensor, Var};

/// Weights of the temporal RRMSE, spectral RRMSE and log-cosh terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            a: 0.25,
            b: 0.25,
            c: 0.5,
        }
    }
}

impl LossWeights {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let all = [self.a, self.b, self.c];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            v.push("loss_weights: a, b, c must be finite and nonnegative".into());
        } else if all.iter().sum::<f64>() <= 0.0 {
            v.push("loss_weights: a + b + c must be positive".into());
        }
        v
    }
}

/// `Σ log(cosh(y_i − x_i))`.
pub fn logcosh(g: &mut Graph, x: Var, y: Var) -> Result<Var, TrainError> {
    let d = g.sub(y, x)?;
    Ok(g.log_cosh_sum(d)?)
}

/// `sqrt(Σ(x − pred)² / Σx²)` with `x` a constant target.
pub fn rrmse_t(g: &mut Graph, x_hat: &Tensor, pred: Var) -> Result<Var, TrainError> {
    let energy = x_hat.sum_squares();
    if !(energy > 0.0) {
        return Err(TrainError::DegenerateTarget("ground truth has zero energy".into()));
    }
    let x = g.input(x_hat.clone());
    let d = g.sub(pred, x)?;
    let ss = g.sum_squares(d)?;
    let r = g.scale(ss, 1.0 / energy)?;
    Ok(g.sqrt(r)?)
}

/// RRMSE between the periodograms of the target and the prediction.
pub fn rrmse_f(g: &mut Graph, x_hat: &Tensor, pred: Var) -> Result<Var, TrainError> {
    let px = fft::periodogram(x_hat.data())?;
    let energy: f64 = px.iter().map(|v| v * v).sum();
    if !(energy > 0.0) {
        return Err(TrainError::DegenerateTarget("ground truth PSD has zero energy".into()));
    }
    let f = px.len();
    let px = g.input(Tensor::from_parts_unchecked(px, vec![f]));
    let pp = g.psd(pred)?;
    let d = g.sub(pp, px)?;
    let ss = g.sum_squares(d)?;
    let r = g.scale(ss, 1.0 / energy)?;
    Ok(g.sqrt(r)?)
}

/// `a·RRMSE_t + b·RRMSE_f + c·Σ log cosh(pred − x̂)` recorded on `g`.
pub fn loss(g: &mut Graph, x_hat: &Tensor, pred: Var, w: &LossWeights) -> Result<Var, TrainError> {
    if g.value(pred)?.shape() != x_hat.shape() {
        return Err(TrainError::Tensor(crate::tensor::TensorError::Dimension(format!(
            "prediction {:?} vs target {:?}",
            g.value(pred)?.shape(),
            x_hat.shape()
        ))));
    }
    let rt = rrmse_t(g, x_hat, pred)?;
    let rf = rrmse_f(g, x_hat, pred)?;
    let x = g.input(x_hat.clone());
    let lc = logcosh(g, x, pred)?;
    let rt = g.scale(rt, w.a)?;
    let rf = g.scale(rf, w.b)?;
    let lc = g.scale(lc, w.c)?;
    let s = g.add(rt, rf)?;
    Ok(g.add(s, lc)?)
}

/// Loss value for plain tensors.
pub fn loss_value(x_hat: &Tensor, pred: &Tensor, w: &LossWeights) -> Result<f64, TrainError> {
    let mut g = Graph::new();
    let p = g.input(pred.clone());
    let l = loss(&mut g, x_hat, p, w)?;
    Ok(g.value(l)?.data()[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(d: &[f64]) -> Tensor {
        Tensor::vector(d.to_vec()).unwrap()
    }

    #[test]
    fn zero_at_target() {
        let x = v(&[0.3, -1.0, 2.0, 0.5, 0.1, -0.7, 0.0, 1.2]);
        assert_eq!(loss_value(&x, &x, &LossWeights::default()).unwrap(), 0.0);
    }

    #[test]
    fn log_cosh_of_one() {
        let mut g = Graph::new();
        let x = g.input(v(&[0.0]));
        let y = g.input(v(&[1.0]));
        let l = logcosh(&mut g, x, y).unwrap();
        assert!((g.value(l).unwrap().data()[0] - 0.433_780_830_483_027_1).abs() < 1e-12);
    }

    #[test]
    fn temporal_term_of_zero_prediction_is_one() {
        let x = v(&[1.0, -2.0, 0.5, 3.0]);
        let w = LossWeights { a: 1.0, b: 0.0, c: 0.0 };
        assert!((loss_value(&x, &Tensor::zeros(&[4]), &w).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_target() {
        let z = Tensor::zeros(&[8]);
        assert!(matches!(
            loss_value(&z, &v(&[1.0; 8]), &LossWeights::default()),
            Err(TrainError::DegenerateTarget(_))
        ));
    }

    #[test]
    fn weight_validation() {
        assert!(LossWeights::default().violations().is_empty());
        assert!(!LossWeights { a: 0.0, b: 0.0, c: 0.0 }.violations().is_empty());
        assert!(!LossWeights { a: -1.0, b: 0.0, c: 2.0 }.violations().is_empty());
    }
}
