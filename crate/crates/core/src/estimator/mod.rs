//! Classifiers used to score feature subsets, and the cross-validated
//! accuracy that feeds the fitness function.

mod cv;
pub mod forest;
pub mod logistic;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{cross_val_accuracy, CacheStats, CrossValidator, ScoreCache};
pub use forest::ForestModel;
pub use logistic::{LogisticModel, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    LogisticRegression,
    RandomForest,
}

/// Optimiser for logistic regression. Both minimise the same penalised
/// cross-entropy; gradient descent stops after a fixed epoch count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSolver {
    Newton,
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub lr_solver: LrSolver,
    pub lr_learning_rate: f64,
    pub lr_epochs: usize,
    pub lr_max_newton_iter: usize,
    pub lr_l2: f64,
    pub rf_n_trees: usize,
    pub rf_max_depth: usize,
    pub rf_min_leaf: usize,
    /// Fraction of features tried per split; `None` means sqrt(n_features).
    pub rf_feature_subsample: Option<f64>,
    pub rf_bootstrap: bool,
    pub seed: u64,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec {
            kind: EstimatorKind::LogisticRegression,
            lr_solver: LrSolver::Newton,
            lr_learning_rate: 0.1,
            lr_epochs: 300,
            lr_max_newton_iter: 50,
            lr_l2: 1e-4,
            rf_n_trees: 50,
            rf_max_depth: 8,
            rf_min_leaf: 2,
            rf_feature_subsample: None,
            rf_bootstrap: true,
            seed: 0,
        }
    }
}

impl EstimatorSpec {
    pub fn logistic() -> Self {
        Self::default()
    }

    pub fn random_forest() -> Self {
        EstimatorSpec {
            kind: EstimatorKind::RandomForest,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::config(what.to_string()));
        if !(self.lr_learning_rate > 0.0 && self.lr_learning_rate.is_finite()) {
            return bad("lr_learning_rate must be > 0");
        }
        if !(self.lr_l2 >= 0.0 && self.lr_l2.is_finite()) {
            return bad("lr_l2 must be >= 0");
        }
        if self.lr_max_newton_iter == 0 {
            return bad("lr_max_newton_iter must be >= 1");
        }
        if self.rf_n_trees == 0 {
            return bad("rf_n_trees must be >= 1");
        }
        if self.rf_min_leaf == 0 {
            return bad("rf_min_leaf must be >= 1");
        }
        if let Some(f) = self.rf_feature_subsample {
            if !(f > 0.0 && f <= 1.0) {
                return bad("rf_feature_subsample must be in (0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    /// Fitted on a single-class target; always predicts that class.
    Constant {
        class: usize,
        n_features: usize,
    },
    Logistic(LogisticModel),
    Forest(ForestModel),
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Constant { n_features, .. } => *n_features,
            TrainedModel::Logistic(m) => m.n_features(),
            TrainedModel::Forest(m) => m.n_features,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TrainedModel::Constant { .. })
    }

    /// Predicts from raw (unstandardised) columns.
    pub(crate) fn predict_columns(&self, columns: &[&[f64]], n_rows: usize) -> Vec<usize> {
        match self {
            TrainedModel::Constant { class, .. } => vec![*class; n_rows],
            TrainedModel::Logistic(m) => {
                let z = m.standardizer.apply(columns);
                let refs: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
                m.predict_standardized(&refs, n_rows)
            }
            TrainedModel::Forest(m) => m.predict_columns(columns, n_rows),
        }
    }
}

fn columns_of(features: &Array2<f64>) -> Vec<Vec<f64>> {
    features
        .axis_iter(Axis(1))
        .map(|c| c.iter().copied().collect())
        .collect()
}

/// Classes present in `target`, ascending, and the class-count upper bound.
fn present_classes(target: &[usize]) -> (Vec<usize>, usize) {
    let n_classes = target.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    for &t in target {
        seen[t] = true;
    }
    let classes = (0..n_classes).filter(|&c| seen[c]).collect();
    (classes, n_classes)
}

/// Fits on column slices (all of equal length). Shared by [`fit`] and the
/// cross-validation fast path so both produce identical models.
pub(crate) fn fit_columns(spec: &EstimatorSpec, columns: &[&[f64]], target: &[usize]) -> TrainedModel {
    let (classes, n_classes) = present_classes(target);
    if classes.len() < 2 {
        return TrainedModel::Constant {
            class: classes.first().copied().unwrap_or(0),
            n_features: columns.len(),
        };
    }
    match spec.kind {
        EstimatorKind::LogisticRegression => {
            let standardizer = Standardizer::fit(columns);
            let z = standardizer.apply(columns);
            let refs: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
            TrainedModel::Logistic(logistic::fit_standardized(standardizer, &refs, target, classes, spec))
        }
        EstimatorKind::RandomForest => TrainedModel::Forest(forest::fit(columns, target, n_classes, spec)),
    }
}

/// Trains a classifier. A single-class target yields a constant model
/// rather than an error.
pub fn fit(spec: &EstimatorSpec, features: &Array2<f64>, target: &[usize]) -> Result<TrainedModel> {
    spec.validate()?;
    if features.ncols() == 0 {
        return Err(Error::contract("cannot fit on zero feature columns"));
    }
    if features.nrows() != target.len() || target.is_empty() {
        return Err(Error::contract(format!(
            "{} rows but {} labels",
            features.nrows(),
            target.len()
        )));
    }
    let cols = columns_of(features);
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    Ok(fit_columns(spec, &refs, target))
}

pub fn predict(model: &TrainedModel, features: &Array2<f64>) -> Result<Vec<usize>> {
    if features.ncols() != model.n_features() {
        return Err(Error::contract(format!(
            "model trained on {} columns, got {}",
            model.n_features(),
            features.ncols()
        )));
    }
    let cols = columns_of(features);
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    Ok(model.predict_columns(&refs, features.nrows()))
}

/// Fraction of positions where `predicted` equals `actual`.
pub fn accuracy(predicted: &[usize], actual: &[usize]) -> f64 {
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    hits as f64 / actual.len() as f64
}
