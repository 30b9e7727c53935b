//! L2-regularized logistic regression probe with in-model standardization,
//! deterministic stratified splitting and accuracy.

use std::fmt::Write as _;

use ndarray::{Array1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Floor applied to per-feature standard deviations.
pub const STD_FLOOR: f64 = 1e-12;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1e-2,
            max_iter: 2000,
            grad_tol: 1e-6,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("l2_lambda {} must be >= 0", self.l2_lambda)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("grad_tol {} must be > 0", self.grad_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 42,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.train_fraction > 0.0 && self.train_fraction < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "train fraction {} must lie in (0, 1)",
                self.train_fraction
            )))
        }
    }
}

/// Splits `0..labels.len()` into train and validation index sets.
///
/// Stratified splits shuffle each class with one seeded generator (class 0
/// first), then allocate `round(fraction * n)` training items across classes
/// by largest remainder, so every class is within one item of its exact
/// share. Both returned lists are sorted.
pub fn split(labels: &[u8], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let n = labels.len();
    if n < 10 {
        return Err(Error::InvalidArgument(format!("split needs at least 10 items, got {n}")));
    }
    let mut rng = SplitMix64::seed_from_u64(spec.seed);
    let total_train = (spec.train_fraction * n as f64).round() as usize;

    let (mut train, mut val) = if spec.stratified {
        let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &l) in labels.iter().enumerate() {
            classes[usize::from(l != 0)].push(i);
        }
        if classes.iter().any(Vec::is_empty) {
            return Err(Error::SingleClass);
        }
        for c in classes.iter_mut() {
            c.shuffle(&mut rng);
        }
        let exact: Vec<f64> = classes.iter().map(|c| spec.train_fraction * c.len() as f64).collect();
        let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let mut remaining = total_train.saturating_sub(take.iter().sum());
        let mut by_remainder = [0usize, 1];
        by_remainder.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &c in by_remainder.iter().cycle().take(4) {
            if remaining == 0 {
                break;
            }
            if take[c] < classes[c].len() {
                take[c] += 1;
                remaining -= 1;
            }
        }
        let mut train = Vec::with_capacity(total_train);
        let mut val = Vec::with_capacity(n - total_train);
        for (c, members) in classes.iter().enumerate() {
            train.extend_from_slice(&members[..take[c]]);
            val.extend_from_slice(&members[take[c]..]);
        }
        (train, val)
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        let val = all.split_off(total_train);
        (all, val)
    };
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Per-feature mean and (population) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let std = x.std_axis(Axis(0), 0.0).mapv(|s| s.max(STD_FLOOR));
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> ndarray::Array2<f64> {
        (&x - &self.mean) / &self.std
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `J(w, b) = mean log-loss + lambda * |w|²` over standardized features.
///
/// Parameters are packed as `[w_1, ..., w_d, b]`.
#[derive(Debug, Clone, Copy)]
pub struct LogisticObjective<'a> {
    pub features: ArrayView2<'a, f64>,
    pub labels: &'a [f64],
    pub l2_lambda: f64,
}

impl LogisticObjective<'_> {
    pub fn n_params(&self) -> usize {
        self.features.ncols() + 1
    }

    fn margins(&self, params: &[f64]) -> Array1<f64> {
        let d = self.features.ncols();
        let w = ndarray::ArrayView1::from(&params[..d]);
        self.features.dot(&w) + params[d]
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let d = self.features.ncols();
        let z = self.margins(params);
        let n = self.labels.len() as f64;
        let loss: f64 = z.iter().zip(self.labels).map(|(&z, &y)| softplus(z) - y * z).sum();
        let ridge: f64 = params[..d].iter().map(|w| w * w).sum();
        loss / n + self.l2_lambda * ridge
    }

    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let d = self.features.ncols();
        let z = self.margins(params);
        let n = self.labels.len() as f64;
        let mut loss = 0.0;
        let residual: Array1<f64> = z
            .iter()
            .zip(self.labels)
            .map(|(&z, &y)| {
                loss += softplus(z) - y * z;
                (sigmoid(z) - y) / n
            })
            .collect();
        let gw = self.features.t().dot(&residual);
        let mut grad = Vec::with_capacity(d + 1);
        let mut ridge = 0.0;
        for (g, w) in gw.iter().zip(&params[..d]) {
            grad.push(g + 2.0 * self.l2_lambda * w);
            ridge += w * w;
        }
        grad.push(residual.sum());
        (loss / n + self.l2_lambda * ridge, grad)
    }
}

/// A trained probe: weights act on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub config: TrainConfig,
}

fn check_training_inputs(features: ArrayView2<f64>, labels: &[u8]) -> Result<()> {
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.nrows(),
            right: labels.len(),
        });
    }
    if labels.len() < 2 {
        return Err(Error::InvalidArgument("training needs at least 2 rows".into()));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite feature".into()));
    }
    let ones = labels.iter().filter(|&&l| l != 0).count();
    if ones == 0 || ones == labels.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Trains the probe by full-batch gradient descent with Armijo backtracking.
pub fn train(features: ArrayView2<f64>, labels: &[u8], config: &TrainConfig) -> Result<LogisticModel> {
    train_traced(features, labels, config).map(|(m, _)| m)
}

/// Like [`train`], also returning the objective after every accepted step
/// (first entry is the objective at the zero initialization).
pub fn train_traced(
    features: ArrayView2<f64>,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(LogisticModel, Vec<f64>)> {
    config.validate()?;
    check_training_inputs(features, labels)?;

    let scaler = Standardizer::fit(features);
    let x = scaler.apply(features);
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l != 0)).collect();
    let obj = LogisticObjective {
        features: x.view(),
        labels: &y,
        l2_lambda: config.l2_lambda,
    };

    let mut params = vec![0.0; obj.n_params()];
    let (mut value, mut grad) = obj.value_and_gradient(&params);
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    let mut candidate = vec![0.0; params.len()];

    while iterations < config.max_iter {
        let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gmax < config.grad_tol {
            converged = true;
            break;
        }
        let gsq: f64 = grad.iter().map(|g| g * g).sum();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for ((c, p), g) in candidate.iter_mut().zip(&params).zip(&grad) {
                *c = p - step * g;
            }
            let v = obj.value(&candidate);
            // the strict check matters once the Armijo term underflows J's precision
            if v <= value - ARMIJO_C * step * gsq && v < value {
                accepted = Some(v);
                break;
            }
            step *= 0.5;
        }
        let Some(_) = accepted else {
            // no decrease representable at this precision
            break;
        };
        params.copy_from_slice(&candidate);
        (value, grad) = obj.value_and_gradient(&params);
        trace.push(value);
        iterations += 1;
    }
    if !converged {
        converged = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())) < config.grad_tol;
    }

    let d = features.ncols();
    let model = LogisticModel {
        weights: params[..d].to_vec(),
        bias: params[d],
        feature_mean: scaler.mean.to_vec(),
        feature_std: scaler.std.to_vec(),
        converged,
        iterations,
        objective: value,
        config: *config,
    };
    Ok((model, trace))
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Decision margins `w · x_std + b`.
    pub fn decision_function(&self, features: ArrayView2<f64>) -> Result<Array1<f64>> {
        if features.ncols() != self.dim() {
            return Err(Error::LengthMismatch {
                left: features.ncols(),
                right: self.dim(),
            });
        }
        Ok(features
            .outer_iter()
            .map(|row| {
                row.iter()
                    .zip(&self.feature_mean)
                    .zip(&self.feature_std)
                    .zip(&self.weights)
                    .map(|(((x, m), s), w)| w * (x - m) / s)
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    /// Serializes the model as a versioned plain-text record.
    pub fn to_record(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "{MODEL_RECORD_VERSION}");
        let _ = writeln!(s, "weights {}", join(&self.weights));
        let _ = writeln!(s, "bias {}", self.bias);
        let _ = writeln!(s, "mean {}", join(&self.feature_mean));
        let _ = writeln!(s, "std {}", join(&self.feature_std));
        let _ = writeln!(
            s,
            "config l2_lambda={} max_iter={} grad_tol={} seed={}",
            self.config.l2_lambda, self.config.max_iter, self.config.grad_tol, self.config.seed
        );
        let _ = writeln!(s, "converged {}", self.converged);
        let _ = writeln!(s, "iterations {}", self.iterations);
        let _ = writeln!(s, "objective {}", self.objective);
        s
    }

    /// Parses a record written by [`LogisticModel::to_record`].
    pub fn from_record(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, v)) if v == MODEL_RECORD_VERSION => {}
            _ => {
                return Err(Error::BadLine {
                    line: 1,
                    msg: format!("expected `{MODEL_RECORD_VERSION}`"),
                })
            }
        }
        let bad = |line: usize, msg: &str| Error::BadLine {
            line: line + 1,
            msg: msg.to_string(),
        };
        let floats = |line: usize, rest: &str| -> Result<Vec<f64>> {
            rest.split_ascii_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(line, "bad number")))
                .collect()
        };

        let mut weights = None;
        let mut bias = None;
        let mut mean = None;
        let mut std = None;
        let mut config = None;
        let mut converged = None;
        let mut iterations = None;
        let mut objective = None;
        for (i, line) in lines {
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "weights" => weights = Some(floats(i, rest)?),
                "bias" => bias = Some(rest.trim().parse().map_err(|_| bad(i, "bad bias"))?),
                "mean" => mean = Some(floats(i, rest)?),
                "std" => std = Some(floats(i, rest)?),
                "converged" => converged = Some(rest.trim() == "true"),
                "iterations" => iterations = Some(rest.trim().parse().map_err(|_| bad(i, "bad count"))?),
                "objective" => objective = Some(rest.trim().parse().map_err(|_| bad(i, "bad objective"))?),
                "config" => {
                    let mut c = TrainConfig::default();
                    for kv in rest.split_ascii_whitespace() {
                        let (k, v) = kv.split_once('=').ok_or_else(|| bad(i, "bad config field"))?;
                        let e = |_| bad(i, "bad config value");
                        match k {
                            "l2_lambda" => c.l2_lambda = v.parse().map_err(e)?,
                            "max_iter" => c.max_iter = v.parse().map_err(|_| bad(i, "bad max_iter"))?,
                            "grad_tol" => c.grad_tol = v.parse().map_err(e)?,
                            "seed" => c.seed = v.parse().map_err(|_| bad(i, "bad seed"))?,
                            _ => return Err(bad(i, "unknown config field")),
                        }
                    }
                    config = Some(c);
                }
                "" => {}
                _ => return Err(bad(i, "unknown field")),
            }
        }
        let missing = |f: &str| Error::InvalidArgument(format!("model record lacks `{f}`"));
        let model = LogisticModel {
            weights: weights.ok_or_else(|| missing("weights"))?,
            bias: bias.ok_or_else(|| missing("bias"))?,
            feature_mean: mean.ok_or_else(|| missing("mean"))?,
            feature_std: std.ok_or_else(|| missing("std"))?,
            converged: converged.unwrap_or(false),
            iterations: iterations.unwrap_or(0),
            objective: objective.unwrap_or(f64::NAN),
            config: config.ok_or_else(|| missing("config"))?,
        };
        let d = model.weights.len();
        if model.feature_mean.len() != d || model.feature_std.len() != d {
            return Err(Error::InvalidArgument("model record has inconsistent lengths".into()));
        }
        if model.feature_std.iter().any(|&s| s.is_nan() || s < STD_FLOOR) {
            return Err(Error::InvalidArgument("model record has std below floor".into()));
        }
        Ok(model)
    }
}

pub const MODEL_RECORD_VERSION: &str = "affect-probe-logistic v1";

/// Label 1 iff `w · x_std + b >= 0` (probability at least one half).
pub fn predict(model: &LogisticModel, features: ArrayView2<f64>) -> Result<Vec<u8>> {
    Ok(model
        .decision_function(features)?
        .iter()
        .map(|&z| u8::from(z >= 0.0))
        .collect())
}

/// Fraction of positions where `pred` and `truth` agree.
pub fn accuracy(pred: &[u8], truth: &[u8]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty prediction".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}
