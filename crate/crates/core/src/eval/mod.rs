//! Downstream classifiers, metrics, and experiment sweeps.

pub mod metrics;
mod sweep;
pub mod tree;

pub use metrics::{auc, Confusion};
pub use sweep::{sweep, Source, SweepCoreset, SweepOutput, SweepPlan, SweepResult, SweepRow};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distill::SyntheticSet;
use crate::error::{Error, Result};
use crate::kernel::{krr_fit, krr_predict, KernelSpec, KrrModel};
use crate::objectives::sigmoid;
use crate::rng;
use tree::{DecisionTree, Forest, TreeParams};

/// Exact KRR needs an n x n factorization; larger training sets are refused.
pub const MAX_KRR_TRAIN_ROWS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClassifierSpec {
    Krr {
        ridge: f64,
        kernel: KernelSpec,
        /// On synthetic input, regress on the learned support labels instead
        /// of the ±1 class encoding.
        regress_on_support_labels: bool,
    },
    Logreg {
        l2: f64,
        max_iter: usize,
    },
    Knn {
        k: usize,
    },
    Cart {
        max_depth: usize,
        min_leaf: usize,
    },
    Forest {
        n_trees: usize,
        /// Fraction of features tried per split; `None` means sqrt(D) / D.
        feature_fraction: Option<f64>,
        max_depth: usize,
        min_leaf: usize,
        seed: u64,
    },
}

impl ClassifierSpec {
    pub fn krr(kernel: KernelSpec) -> Self {
        ClassifierSpec::Krr {
            ridge: 1e-6,
            kernel,
            regress_on_support_labels: false,
        }
    }

    pub fn logreg() -> Self {
        ClassifierSpec::Logreg {
            l2: 1e-3,
            max_iter: 5000,
        }
    }

    pub fn knn() -> Self {
        ClassifierSpec::Knn { k: 5 }
    }

    pub fn cart() -> Self {
        ClassifierSpec::Cart {
            max_depth: 8,
            min_leaf: 2,
        }
    }

    pub fn forest() -> Self {
        ClassifierSpec::Forest {
            n_trees: 100,
            feature_fraction: None,
            max_depth: 12,
            min_leaf: 1,
            seed: 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Krr { .. } => "krr",
            ClassifierSpec::Logreg { .. } => "logreg",
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::Cart { .. } => "cart",
            ClassifierSpec::Forest { .. } => "forest",
        }
    }

    /// Replaces the seed of randomized classifiers.
    pub fn with_seed(self, s: u64) -> Self {
        match self {
            ClassifierSpec::Forest {
                n_trees,
                feature_fraction,
                max_depth,
                min_leaf,
                ..
            } => ClassifierSpec::Forest {
                n_trees,
                feature_fraction,
                max_depth,
                min_leaf,
                seed: s,
            },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierSpec::Krr { ridge, kernel, .. } => {
                if !(ridge > 0.0 && ridge.is_finite()) {
                    return Err(Error::invalid("ridge", format!("{ridge} must be positive")));
                }
                kernel.validate()
            }
            ClassifierSpec::Logreg { l2, max_iter } => {
                if !(l2 >= 0.0 && l2.is_finite()) || max_iter == 0 {
                    return Err(Error::invalid("logreg", "need l2 >= 0 and max_iter >= 1"));
                }
                Ok(())
            }
            ClassifierSpec::Knn { k: 0 } => Err(Error::invalid("k", "must be at least 1")),
            ClassifierSpec::Cart { max_depth, min_leaf }
            | ClassifierSpec::Forest {
                max_depth, min_leaf, ..
            } if max_depth == 0 || min_leaf == 0 => Err(Error::invalid(
                "max_depth",
                "tree depth and leaf size must be at least 1",
            )),
            ClassifierSpec::Forest {
                n_trees,
                feature_fraction,
                ..
            } => {
                if n_trees == 0 {
                    return Err(Error::invalid("n_trees", "must be at least 1"));
                }
                match feature_fraction {
                    Some(f) if !(f > 0.0 && f <= 1.0) => Err(Error::invalid(
                        "feature_fraction",
                        format!("{f} is not in (0, 1]"),
                    )),
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

/// What a classifier is trained on.
#[derive(Debug, Clone, Copy)]
pub enum TrainingData<'a> {
    Real(&'a Dataset),
    Synthetic(&'a SyntheticSet),
}

impl<'a> TrainingData<'a> {
    fn features(&self) -> &'a DMatrix<f64> {
        match *self {
            TrainingData::Real(d) => d.features(),
            TrainingData::Synthetic(s) => &s.x,
        }
    }

    fn labels(&self) -> &'a [u8] {
        match *self {
            TrainingData::Real(d) => d.labels(),
            TrainingData::Synthetic(s) => &s.y_class,
        }
    }
}

impl<'a> From<&'a Dataset> for TrainingData<'a> {
    fn from(d: &'a Dataset) -> Self {
        TrainingData::Real(d)
    }
}

impl<'a> From<&'a SyntheticSet> for TrainingData<'a> {
    fn from(s: &'a SyntheticSet) -> Self {
        TrainingData::Synthetic(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Fitted {
    Krr(KrrModel),
    Logreg { weights: DVector<f64>, bias: f64 },
    Knn { x: DMatrix<f64>, y: Vec<u8>, k: usize },
    Tree(DecisionTree),
    Forest(Forest),
}

/// A trained classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    fitted: Fitted,
    width: usize,
    n_train: usize,
}

impl TrainedModel {
    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

pub fn train_classifier<'a>(spec: &ClassifierSpec, data: impl Into<TrainingData<'a>>) -> Result<TrainedModel> {
    let data = data.into();
    spec.validate()?;
    let x = data.features();
    let y = data.labels();
    let n = x.nrows();
    if n == 0 {
        return Err(Error::InvalidDataset("empty training set".into()));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::InvalidDataset(format!(
            "single-class training input ({pos} positives of {n})"
        )));
    }
    let fitted = match *spec {
        ClassifierSpec::Krr {
            ridge,
            kernel,
            regress_on_support_labels,
        } => {
            if n > MAX_KRR_TRAIN_ROWS {
                return Err(Error::invalid(
                    "krr",
                    format!("{n} training rows exceeds the exact-solve limit {MAX_KRR_TRAIN_ROWS}"),
                ));
            }
            let targets = match data {
                TrainingData::Synthetic(s) if regress_on_support_labels => s.y.clone(),
                _ => DVector::from_iterator(n, y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 })),
            };
            Fitted::Krr(krr_fit(x, &targets, ridge, &kernel)?)
        }
        ClassifierSpec::Logreg { l2, max_iter } => {
            let (weights, bias) = fit_logreg(x, y, l2, max_iter);
            Fitted::Logreg { weights, bias }
        }
        ClassifierSpec::Knn { k } => Fitted::Knn {
            x: x.clone(),
            y: y.to_vec(),
            k: k.min(n),
        },
        ClassifierSpec::Cart { max_depth, min_leaf } => {
            let params = TreeParams {
                max_depth,
                min_leaf,
                features_per_split: None,
            };
            Fitted::Tree(DecisionTree::fit(x, y, (0..n).collect(), &params, &mut rng::seeded(0)))
        }
        ClassifierSpec::Forest {
            n_trees,
            feature_fraction,
            max_depth,
            min_leaf,
            seed,
        } => {
            let d = x.ncols() as f64;
            let fraction = feature_fraction.unwrap_or(d.sqrt() / d);
            let params = TreeParams {
                max_depth,
                min_leaf,
                features_per_split: Some(((fraction * d).round() as usize).max(1)),
            };
            Fitted::Forest(Forest::fit(x, y, n_trees, &params, seed))
        }
    };
    Ok(TrainedModel {
        fitted,
        width: x.ncols(),
        n_train: n,
    })
}

/// Full-batch gradient descent on mean cross-entropy plus `l2/2 |w|^2`, step
/// size `0.1 / sqrt(t)`, stopping when the gradient norm drops below 1e-6.
fn fit_logreg(x: &DMatrix<f64>, y: &[u8], l2: f64, max_iter: usize) -> (DVector<f64>, f64) {
    let (n, d) = x.shape();
    let targets = DVector::from_iterator(n, y.iter().map(|&l| f64::from(l)));
    let mut w = DVector::zeros(d);
    let mut b = 0.0;
    for t in 1..=max_iter {
        let mut residual = x * &w;
        residual.apply(|z| *z = sigmoid(*z + b));
        residual -= &targets;
        let gw = x.tr_mul(&residual) / n as f64 + &w * l2;
        let gb = residual.mean();
        if (gw.norm_squared() + gb * gb).sqrt() < 1e-6 {
            break;
        }
        let lr = 0.1 / (t as f64).sqrt();
        w -= gw * lr;
        b -= gb * lr;
    }
    (w, b)
}

/// Positive-class probabilities for each row of `x`.
pub fn predict_proba(model: &TrainedModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.ncols() != model.width {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} features, got {}",
            model.width,
            x.ncols()
        )));
    }
    Ok(match &model.fitted {
        Fitted::Krr(m) => krr_predict(m, x)?.iter().map(|&z| sigmoid(z)).collect(),
        Fitted::Logreg { weights, bias } => (x * weights).iter().map(|&z| sigmoid(z + bias)).collect(),
        Fitted::Knn { x: train, y, k } => (0..x.nrows())
            .map(|i| knn_vote(train, y, *k, |j| x[(i, j)]))
            .collect(),
        Fitted::Tree(t) => (0..x.nrows()).map(|i| t.predict_row(|j| x[(i, j)])).collect(),
        Fitted::Forest(f) => (0..x.nrows()).map(|i| f.predict_row(|j| x[(i, j)])).collect(),
    })
}

/// Inverse-distance weighted vote over the `k` nearest rows (ties in distance
/// broken by row index). Exact matches take the whole vote.
fn knn_vote(train: &DMatrix<f64>, y: &[u8], k: usize, query: impl Fn(usize) -> f64) -> f64 {
    let mut dist: Vec<(f64, usize)> = (0..train.nrows())
        .map(|r| {
            let d2: f64 = (0..train.ncols())
                .map(|j| (train[(r, j)] - query(j)).powi(2))
                .sum();
            (d2.sqrt(), r)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, cmp);
        dist.truncate(k);
    }
    let exact: Vec<_> = dist.iter().filter(|(d, _)| *d == 0.0).collect();
    if !exact.is_empty() {
        return exact.iter().map(|&&(_, r)| f64::from(y[r])).sum::<f64>() / exact.len() as f64;
    }
    let (num, den) = dist.iter().fold((0.0, 0.0), |(num, den), &(d, r)| {
        let w = 1.0 / d;
        (num + w * f64::from(y[r]), den + w)
    });
    num / den
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub f1: f64,
    pub balanced_accuracy: f64,
    pub minority_recall: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub threshold: f64,
}

/// Scores the model on `test`. The positive class is treated as the
/// minority; a score at or above `threshold` predicts positive.
pub fn evaluate(model: &TrainedModel, test: &Dataset, threshold: f64) -> Result<EvalReport> {
    let scores = predict_proba(model, test.features())?;
    report_from_scores(&scores, test.labels(), threshold, model.n_train)
}

pub fn report_from_scores(scores: &[f64], labels: &[u8], threshold: f64, n_train: usize) -> Result<EvalReport> {
    let auc = metrics::auc(scores, labels)?;
    let c = Confusion::at_threshold(scores, labels, threshold);
    Ok(EvalReport {
        auc,
        f1: c.f1(),
        balanced_accuracy: c.balanced_accuracy(),
        minority_recall: c.recall(),
        n_train,
        n_test: labels.len(),
        threshold,
    })
}
