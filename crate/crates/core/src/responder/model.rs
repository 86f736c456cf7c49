use serde::{Deserialize, Serialize};

use super::ResponderError;

/// Z-scores columns with statistics from the training rows. Constant
/// columns are only centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let sd = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 { var.sqrt() } else { 1.0 }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (v - self.mean[j]) / self.sd[j]).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self { learning_rate: 0.1, l2: 0.01, epochs: 2000 }
    }
}

impl HyperParams {
    /// Learning rate {0.01, 0.1} × l2 {0, 0.01, 0.1}.
    pub fn grid(epochs: usize) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for learning_rate in [0.01, 0.1] {
            for l2 in [0.0, 0.01, 0.1] {
                out.push(HyperParams { learning_rate, l2, epochs });
            }
        }
        out
    }
}

/// Multinomial logistic regression: `weights[class][feature]` plus a bias
/// per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogReg {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogReg {
    pub fn zeros(classes: usize, features: usize) -> Self {
        Self { weights: vec![vec![0.0; features]; classes], bias: vec![0.0; classes] }
    }

    pub fn classes(&self) -> usize {
        self.bias.len()
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }

    /// Softmax probabilities and the log of the normalizer.
    fn softmax(z: &[f64]) -> (Vec<f64>, f64) {
        let m = z.iter().copied().reduce(f64::max).unwrap_or(0.0);
        let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        (e.into_iter().map(|v| v / s).collect(), m + s.ln())
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        Self::softmax(&self.logits(x)).0
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let p = self.predict_proba(x);
        (0..p.len()).fold(0, |best, k| if p[k] > p[best] { k } else { best })
    }

    /// Mean cross-entropy plus `l2/2·‖W‖²` (bias unpenalized), and its
    /// gradient in the shape of the model.
    pub fn loss_and_grad(&self, x: &[Vec<f64>], y: &[usize], l2: f64) -> (f64, LogReg) {
        let n = x.len().max(1) as f64;
        let mut grad = LogReg::zeros(self.classes(), self.weights.first().map_or(0, Vec::len));
        let mut loss = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let z = self.logits(row);
            let (p, lse) = Self::softmax(&z);
            loss += lse - z[label];
            for k in 0..self.classes() {
                let err = p[k] - if k == label { 1.0 } else { 0.0 };
                grad.bias[k] += err / n;
                for (g, v) in grad.weights[k].iter_mut().zip(row) {
                    *g += err * v / n;
                }
            }
        }
        loss /= n;
        for (w, g) in self.weights.iter().zip(&mut grad.weights) {
            for (wi, gi) in w.iter().zip(g.iter_mut()) {
                loss += 0.5 * l2 * wi * wi;
                *gi += l2 * wi;
            }
        }
        (loss, grad)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().flatten().chain(self.bias.iter_mut())
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().flatten().chain(self.bias.iter())
    }
}

const GRAD_TOL: f64 = 1e-7;

/// Full-batch gradient descent from zero weights. Stops early once the
/// largest gradient component falls below 1e-7.
pub fn train_logreg(x: &[Vec<f64>], y: &[usize], classes: usize, hp: HyperParams) -> Result<LogReg, ResponderError> {
    if x.is_empty() {
        return Err(ResponderError::Empty);
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= classes) {
        return Err(ResponderError::InvalidParameter(format!("label {bad} with {classes} classes")));
    }
    if !(hp.learning_rate > 0.0) || !(hp.l2 >= 0.0) {
        return Err(ResponderError::InvalidParameter(format!("{hp:?}")));
    }
    let mut model = LogReg::zeros(classes, x[0].len());
    for epoch in 0..hp.epochs {
        let (loss, grad) = model.loss_and_grad(x, y, hp.l2);
        if !loss.is_finite() {
            return Err(ResponderError::NonFiniteLoss { epoch, learning_rate: hp.learning_rate, l2: hp.l2 });
        }
        if grad.params().all(|g| g.abs() < GRAD_TOL) {
            break;
        }
        for (p, g) in model.params_mut().zip(grad.params()) {
            *p -= hp.learning_rate * g;
        }
    }
    Ok(model)
}

/// Largest relative difference between the analytic gradient and central
/// finite differences with step `h`.
pub fn gradient_check(model: &LogReg, x: &[Vec<f64>], y: &[usize], l2: f64, h: f64) -> f64 {
    let (_, analytic) = model.loss_and_grad(x, y, l2);
    let analytic: Vec<f64> = analytic.params().copied().collect();
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let mut plus = model.clone();
        let mut minus = model.clone();
        *plus.params_mut().nth(i).unwrap() += h;
        *minus.params_mut().nth(i).unwrap() -= h;
        let numeric = (plus.loss_and_grad(x, y, l2).0 - minus.loss_and_grad(x, y, l2).0) / (2.0 * h);
        let denom = a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((a - numeric).abs() / denom);
    }
    worst
}
