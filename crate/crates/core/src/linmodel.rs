//! Binary logistic regression over sparse features, plus the evaluation
//! metrics used to report classifier quality.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// L2 penalty on the weights; the bias is not penalised.
    pub l2_lambda: f64,
    pub max_iterations: usize,
    /// Largest step tried by the backtracking line search.
    pub learning_rate: f64,
    /// Stop once the gradient's max-norm falls below this.
    pub tolerance: f64,
    /// Unused by full-batch training, which starts from zero; kept so a
    /// shuffling optimiser can slot in without changing configs.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1e-4,
            max_iterations: 500,
            learning_rate: 4.0,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidArgument(
                "l2_lambda must be finite and >= 0".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be > 0".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
}

/// Logistic function, stable for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Serialize, Deserialize)]
struct LogisticWire {
    format_version: u32,
    dimension: usize,
    bias: f64,
    weights: Vec<(usize, f64)>,
}

impl LogisticModel {
    pub const FORMAT_VERSION: u32 = 1;

    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        Ok(LogisticModel { weights, bias })
    }

    pub fn zeros(dimension: usize) -> Self {
        LogisticModel {
            weights: vec![0.0; dimension],
            bias: 0.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    fn check_dimension(&self, x: &SparseVector) -> Result<()> {
        if x.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: x.dimension(),
            });
        }
        Ok(())
    }

    /// `w·x + b`.
    pub fn decision(&self, x: &SparseVector) -> Result<f64> {
        self.check_dimension(x)?;
        Ok(x.dot(&self.weights) + self.bias)
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<f64> {
        Ok(sigmoid(self.decision(x)?))
    }

    /// True iff the probability is strictly above `threshold`.
    pub fn predict(&self, x: &SparseVector, threshold: f64) -> Result<bool> {
        Ok(self.predict_proba(x)? > threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = LogisticWire {
            format_version: Self::FORMAT_VERSION,
            dimension: self.dimension(),
            bias: self.bias,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|&(_, &w)| w != 0.0)
                .map(|(i, &w)| (i, w))
                .collect(),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let wire: LogisticWire = serde_json::from_str(json)?;
        if wire.format_version != Self::FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: wire.format_version,
                expected: Self::FORMAT_VERSION,
            });
        }
        let mut weights = vec![0.0; wire.dimension];
        for (i, w) in wire.weights {
            *weights.get_mut(i).ok_or_else(|| {
                Error::InvalidModel(format!(
                    "weight index {i} outside dimension {}",
                    wire.dimension
                ))
            })? = w;
        }
        Self::new(weights, wire.bias)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Gradient of the regularised mean negative log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Gradient {
    pub fn max_norm(&self) -> f64 {
        self.weights
            .iter()
            .fold(self.bias.abs(), |m, g| m.max(g.abs()))
    }
}

fn objective(model: &LogisticModel, xs: &[SparseVector], ys: &[bool], l2_lambda: f64) -> f64 {
    let n = xs.len() as f64;
    let nll: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = x.dot(&model.weights) + model.bias;
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum::<f64>()
        / n;
    let penalty: f64 = model.weights.iter().map(|w| w * w).sum::<f64>() * l2_lambda / 2.0;
    nll + penalty
}

/// Loss `mean(NLL) + λ/2·‖w‖²` and its gradient at `model`.
pub fn loss_and_gradient(
    model: &LogisticModel,
    xs: &[SparseVector],
    ys: &[bool],
    l2_lambda: f64,
) -> Result<(f64, Gradient)> {
    check_training_data(xs, ys, model.dimension())?;
    let n = xs.len() as f64;
    let mut gw: Vec<f64> = model.weights.iter().map(|w| l2_lambda * w).collect();
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = x.dot(&model.weights) + model.bias;
        let r = (sigmoid(z) - if y { 1.0 } else { 0.0 }) / n;
        for &(i, v) in x.entries() {
            gw[i] += r * v;
        }
        gb += r;
    }
    Ok((
        objective(model, xs, ys, l2_lambda),
        Gradient {
            weights: gw,
            bias: gb,
        },
    ))
}

fn check_training_data(xs: &[SparseVector], ys: &[bool], dimension: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if let Some(x) = xs.iter().find(|x| x.dimension() != dimension) {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            found: x.dimension(),
        });
    }
    Ok(())
}

/// Train by full-batch gradient descent with a halving line search.
///
/// Every accepted step lowers the objective. Each iteration starts from
/// twice the previous accepted step, capped at `learning_rate`.
pub fn train_logistic(
    xs: &[SparseVector],
    ys: &[bool],
    config: &TrainConfig,
) -> Result<LogisticModel> {
    config.validate()?;
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 training examples, got {}",
            xs.len()
        )));
    }
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::SingleClass("training labels".into()));
    }
    let dimension = xs[0].dimension();
    check_training_data(xs, ys, dimension)?;

    let mut model = LogisticModel::zeros(dimension);
    let mut step = config.learning_rate;
    for iteration in 0..config.max_iterations {
        let (loss, grad) = loss_and_gradient(&model, xs, ys, config.l2_lambda)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { iteration });
        }
        if grad.max_norm() < config.tolerance {
            break;
        }
        step = (step * 2.0).min(config.learning_rate);
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = LogisticModel {
                weights: model
                    .weights
                    .iter()
                    .zip(&grad.weights)
                    .map(|(w, g)| w - step * g)
                    .collect(),
                bias: model.bias - step * grad.bias,
            };
            let new_loss = objective(&candidate, xs, ys, config.l2_lambda);
            if new_loss.is_finite() && new_loss <= loss {
                model = candidate;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(model)
}

fn check_scores(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("evaluation labels".into()));
    }
    Ok((n_pos, n_neg))
}

/// Area under the ROC curve via the Mann-Whitney rank-sum statistic.
///
/// Tied scores share their average rank, which counts each tied
/// positive/negative pair as one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (n_pos, n_neg) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the tie block i..=j shares the mean rank
        let avg_rank = (i + j + 2) as f64 / 2.0;
        let pos_in_block = order[i..=j].iter().filter(|&&k| labels[k]).count();
        pos_rank_sum += avg_rank * pos_in_block as f64;
        i = j + 1;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// No positive predictions, so precision was set to 0.
    pub precision_undefined: bool,
    /// No positive labels, so recall was set to 0.
    pub recall_undefined: bool,
}

impl EvalReport {
    /// Metrics from probability scores, binarised with a strict `> threshold`.
    pub fn from_scores(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Self> {
        check_scores(scores, labels)?;
        let predictions: Vec<bool> = scores.iter().map(|&s| s > threshold).collect();
        let mut report = Self::from_predictions(&predictions, labels)?;
        report.auc = roc_auc(scores, labels)?;
        Ok(report)
    }

    /// Confusion-matrix metrics; `auc` is left at 0.5 since hard predictions
    /// carry no ranking beyond two levels. Use [`EvalReport::from_scores`]
    /// for a real AUC.
    pub fn from_predictions(predictions: &[bool], labels: &[bool]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: predictions.len(),
            });
        }
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &y) in predictions.iter().zip(labels) {
            match (p, y) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Ok(EvalReport {
            accuracy: ratio(tp + tn, labels.len()),
            precision,
            recall,
            f1,
            auc: 0.5,
            tp,
            fp,
            tn,
            fn_,
            precision_undefined: tp + fp == 0,
            recall_undefined: tp + fn_ == 0,
        })
    }
}

/// Evaluate `model` on a labelled set.
pub fn evaluate(
    model: &LogisticModel,
    xs: &[SparseVector],
    ys: &[bool],
    threshold: f64,
) -> Result<EvalReport> {
    let scores = xs
        .iter()
        .map(|x| model.predict_proba(x))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_scores(&scores, ys, threshold)
}
