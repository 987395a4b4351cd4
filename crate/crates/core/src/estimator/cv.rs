use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use super::logistic::{column_stats, fit_standardized, standardize, Standardizer};
use super::{accuracy, fit, predict, present_classes, EstimatorKind, EstimatorSpec};
use crate::dataset::{restrict, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;

/// Memoised cross-validation scores keyed by the exact mask bits.
///
/// Safe for concurrent use; concurrent inserts of the same key store the
/// same value, so last-writer-wins is harmless.
#[derive(Debug, Default)]
pub struct ScoreCache {
    scores: RwLock<HashMap<FeatureMask, f64>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: u64,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Looks a mask up, counting the hit or miss.
    pub fn lookup(&self, mask: &FeatureMask) -> Option<f64> {
        let found = self.peek(mask);
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    /// Looks a mask up without touching the counters.
    pub fn peek(&self, mask: &FeatureMask) -> Option<f64> {
        self.scores.read().expect("score cache poisoned").get(mask).copied()
    }

    pub fn insert(&self, mask: FeatureMask, score: f64) {
        self.scores.write().expect("score cache poisoned").insert(mask, score);
    }

    pub fn len(&self) -> usize {
        self.scores.read().expect("score cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.scores.write().expect("score cache poisoned").clear();
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: self.len() as u64,
        }
    }

    /// Copy of the entries with fresh counters, for an island-private cache.
    pub fn snapshot(&self) -> ScoreCache {
        ScoreCache {
            scores: RwLock::new(self.scores.read().expect("score cache poisoned").clone()),
            ..ScoreCache::default()
        }
    }

    /// Merges another cache's entries and counters into this one.
    pub fn absorb(&self, other: ScoreCache) {
        let stats = other.stats();
        let entries = other.scores.into_inner().expect("score cache poisoned");
        self.scores.write().expect("score cache poisoned").extend(entries);
        self.hits.fetch_add(stats.hits, Ordering::Relaxed);
        self.misses.fetch_add(stats.misses, Ordering::Relaxed);
    }
}

/// Cross-validated accuracy on the mask-selected columns: for each fold,
/// train on the other folds, predict the held-out one, and average the
/// per-fold accuracies without weighting.
///
/// Direct route through [`restrict`], [`fit`] and [`predict`]. Consults
/// and fills `cache`.
pub fn cross_val_accuracy(
    dataset: &Dataset,
    mask: &FeatureMask,
    spec: &EstimatorSpec,
    folds: &FoldAssignment,
    cache: &ScoreCache,
) -> Result<f64> {
    check_folds(dataset, folds)?;
    let restricted = restrict(dataset, mask)?;
    if let Some(score) = cache.lookup(mask) {
        return Ok(score);
    }
    let features = restricted.features();
    let target = restricted.target();
    let mut total = 0.0;
    for fold in 0..folds.k() {
        let (train, test) = folds.split(fold);
        let train_x = features.select(ndarray::Axis(0), &train);
        let train_y: Vec<usize> = train.iter().map(|&i| target[i]).collect();
        let test_x = features.select(ndarray::Axis(0), &test);
        let test_y: Vec<usize> = test.iter().map(|&i| target[i]).collect();
        let model = fit(spec, &train_x, &train_y)?;
        total += accuracy(&predict(&model, &test_x)?, &test_y);
    }
    let score = total / folds.k() as f64;
    cache.insert(mask.clone(), score);
    Ok(score)
}

fn check_folds(dataset: &Dataset, folds: &FoldAssignment) -> Result<()> {
    if folds.n_samples() != dataset.n_samples() {
        return Err(Error::contract(format!(
            "fold assignment covers {} samples, dataset has {}",
            folds.n_samples(),
            dataset.n_samples()
        )));
    }
    if folds.fold_sizes().contains(&0) {
        return Err(Error::contract("every fold must hold at least one sample"));
    }
    Ok(())
}

struct PreparedFold {
    /// Training columns: standardised with training statistics for
    /// logistic regression, raw for the forest.
    train: Vec<Vec<f64>>,
    test: Vec<Vec<f64>>,
    stats: Vec<(f64, f64)>,
    train_y: Vec<usize>,
    test_y: Vec<usize>,
}

/// Cross-validation scorer with per-fold data laid out once, so scoring a
/// mask only selects columns. Produces exactly the scores of
/// [`cross_val_accuracy`].
pub struct CrossValidator {
    spec: EstimatorSpec,
    n_features: usize,
    k: usize,
    folds: Vec<PreparedFold>,
    degenerate_fits: AtomicU64,
}

impl CrossValidator {
    pub fn new(dataset: &Dataset, spec: &EstimatorSpec, folds: &FoldAssignment) -> Result<Self> {
        spec.validate()?;
        check_folds(dataset, folds)?;
        let columns = dataset.columns();
        let target = dataset.target();
        let prepared = (0..folds.k())
            .map(|fold| {
                let (train_idx, test_idx) = folds.split(fold);
                let gather = |col: &Vec<f64>, idx: &[usize]| idx.iter().map(|&i| col[i]).collect::<Vec<f64>>();
                let mut train = Vec::with_capacity(columns.len());
                let mut test = Vec::with_capacity(columns.len());
                let mut stats = Vec::with_capacity(columns.len());
                for col in &columns {
                    let tr = gather(col, &train_idx);
                    let te = gather(col, &test_idx);
                    if spec.kind == EstimatorKind::LogisticRegression {
                        let (mean, scale) = column_stats(&tr);
                        train.push(standardize(&tr, mean, scale));
                        test.push(standardize(&te, mean, scale));
                        stats.push((mean, scale));
                    } else {
                        train.push(tr);
                        test.push(te);
                    }
                }
                PreparedFold {
                    train,
                    test,
                    stats,
                    train_y: train_idx.iter().map(|&i| target[i]).collect(),
                    test_y: test_idx.iter().map(|&i| target[i]).collect(),
                }
            })
            .collect();
        Ok(CrossValidator {
            spec: spec.clone(),
            n_features: dataset.n_features(),
            k: folds.k(),
            folds: prepared,
            degenerate_fits: AtomicU64::new(0),
        })
    }

    pub fn spec(&self) -> &EstimatorSpec {
        &self.spec
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of fold fits so far whose training labels had a single class.
    pub fn degenerate_fits(&self) -> u64 {
        self.degenerate_fits.load(Ordering::Relaxed)
    }

    /// Computes the score without consulting any cache.
    pub fn score(&self, mask: &FeatureMask) -> Result<f64> {
        if mask.len() != self.n_features {
            return Err(Error::contract(format!(
                "mask of length {} for {} features",
                mask.len(),
                self.n_features
            )));
        }
        if mask.none_selected() {
            return Err(Error::contract("cannot score an empty mask"));
        }
        let selected = mask.selected();
        let mut total = 0.0;
        for fold in &self.folds {
            let train: Vec<&[f64]> = selected.iter().map(|&j| fold.train[j].as_slice()).collect();
            let test: Vec<&[f64]> = selected.iter().map(|&j| fold.test[j].as_slice()).collect();
            let n_test = fold.test_y.len();
            let predicted = match self.spec.kind {
                EstimatorKind::LogisticRegression => {
                    let (classes, _) = present_classes(&fold.train_y);
                    if classes.len() < 2 {
                        self.degenerate_fits.fetch_add(1, Ordering::Relaxed);
                        vec![classes[0]; n_test]
                    } else {
                        let (means, scales) = selected.iter().map(|&j| fold.stats[j]).unzip();
                        let standardizer = Standardizer { means, scales };
                        let model = fit_standardized(standardizer, &train, &fold.train_y, classes, &self.spec);
                        model.predict_standardized(&test, n_test)
                    }
                }
                EstimatorKind::RandomForest => {
                    let model = super::fit_columns(&self.spec, &train, &fold.train_y);
                    if model.is_constant() {
                        self.degenerate_fits.fetch_add(1, Ordering::Relaxed);
                    }
                    model.predict_columns(&test, n_test)
                }
            };
            total += accuracy(&predicted, &fold.test_y);
        }
        Ok(total / self.k as f64)
    }

    /// Cached score: returns the memoised value or computes and stores it.
    pub fn score_cached(&self, mask: &FeatureMask, cache: &ScoreCache) -> Result<f64> {
        if let Some(score) = cache.lookup(mask) {
            return Ok(score);
        }
        let score = self.score(mask)?;
        cache.insert(mask.clone(), score);
        Ok(score)
    }
}

impl std::fmt::Debug for CrossValidator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CrossValidator")
            .field("spec", &self.spec)
            .field("n_features", &self.n_features)
            .field("k", &self.k)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_toy, kfold_split};
    use ndarray::Array2;

    fn copy_target_dataset() -> Dataset {
        // target equals feature 3
        let features = Array2::from_shape_fn((120, 5), |(i, j)| {
            if j == 3 {
                (i % 2) as f64
            } else {
                ((i * (j + 7) * 31) % 97) as f64 / 97.0
            }
        });
        let target = (0..120).map(|i| i % 2).collect();
        let names = (0..5).map(|j| format!("f{j}")).collect();
        Dataset::new(features, target, names, vec!["0".into(), "1".into()]).unwrap()
    }

    #[test]
    fn perfect_predictor_scores_one() {
        let d = copy_target_dataset();
        let folds = kfold_split(d.n_samples(), 5, 1).unwrap();
        let mask = FeatureMask::from_indices(5, &[3]);
        let cache = ScoreCache::new();
        let score = cross_val_accuracy(&d, &mask, &EstimatorSpec::random_forest(), &folds, &cache).unwrap();
        assert_eq!(score, 1.0);
        let cv = CrossValidator::new(&d, &EstimatorSpec::random_forest(), &folds).unwrap();
        assert_eq!(cv.score(&mask).unwrap(), 1.0);
    }

    #[test]
    fn fast_path_matches_direct_route_bitwise() {
        let d = generate_toy(300, 8, 3, 0.5, 5).unwrap();
        let folds = kfold_split(d.n_samples(), 5, 2).unwrap();
        for spec in [
            EstimatorSpec::logistic(),
            EstimatorSpec {
                lr_solver: super::super::LrSolver::GradientDescent,
                ..EstimatorSpec::logistic()
            },
            EstimatorSpec {
                rf_n_trees: 7,
                ..EstimatorSpec::random_forest()
            },
        ] {
            let cv = CrossValidator::new(&d, &spec, &folds).unwrap();
            for bits in ["11111111", "10100110", "00000001", "11100000"] {
                let mask = FeatureMask::parse(bits).unwrap();
                let direct = cross_val_accuracy(&d, &mask, &spec, &folds, &ScoreCache::new()).unwrap();
                let fast = cv.score(&mask).unwrap();
                assert_eq!(direct.to_bits(), fast.to_bits(), "{:?} {bits}", spec.kind);
            }
        }
    }

    #[test]
    fn empty_and_wrong_length_masks_are_rejected() {
        let d = copy_target_dataset();
        let folds = kfold_split(d.n_samples(), 5, 1).unwrap();
        let cv = CrossValidator::new(&d, &EstimatorSpec::logistic(), &folds).unwrap();
        assert!(matches!(cv.score(&FeatureMask::zeros(5)), Err(Error::Contract(_))));
        assert!(matches!(cv.score(&FeatureMask::ones(4)), Err(Error::Contract(_))));
        let cache = ScoreCache::new();
        assert!(cross_val_accuracy(&d, &FeatureMask::zeros(5), &EstimatorSpec::logistic(), &folds, &cache).is_err());
    }

    #[test]
    fn cache_counts_and_transparency() {
        let d = generate_toy(200, 6, 2, 0.5, 9).unwrap();
        let folds = kfold_split(d.n_samples(), 4, 3).unwrap();
        let cv = CrossValidator::new(&d, &EstimatorSpec::logistic(), &folds).unwrap();
        let cache = ScoreCache::new();
        let mask = FeatureMask::parse("110010").unwrap();
        let cold = cv.score_cached(&mask, &cache).unwrap();
        let warm = cv.score_cached(&mask, &cache).unwrap();
        assert_eq!(cold.to_bits(), warm.to_bits());
        assert_eq!(
            cache.stats(),
            CacheStats {
                hits: 1,
                misses: 1,
                entries: 1
            }
        );
        cache.clear();
        assert_eq!(cv.score_cached(&mask, &cache).unwrap().to_bits(), cold.to_bits());
    }

    #[test]
    fn snapshot_and_absorb() {
        let base = ScoreCache::new();
        base.insert(FeatureMask::parse("10").unwrap(), 0.5);
        let island = base.snapshot();
        assert_eq!(island.lookup(&FeatureMask::parse("10").unwrap()), Some(0.5));
        assert_eq!(island.lookup(&FeatureMask::parse("01").unwrap()), None);
        island.insert(FeatureMask::parse("01").unwrap(), 0.7);
        base.absorb(island);
        assert_eq!(
            base.stats(),
            CacheStats {
                hits: 1,
                misses: 1,
                entries: 2
            }
        );
    }

    #[test]
    fn standardisation_uses_training_rows_only() {
        // fold 0's test rows are shifted by a huge constant in feature 0;
        // leaking them into the training statistics would wreck the scale
        let n = 100;
        let folds = kfold_split(n, 5, 0).unwrap();
        let fold_of = folds.fold_of_sample().to_vec();
        let features = Array2::from_shape_fn((n, 1), |(i, _)| {
            let base = (i % 2) as f64 + ((i * 17) % 10) as f64 * 0.01;
            if fold_of[i] == 0 {
                base + 1e6
            } else {
                base
            }
        });
        let target: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let d = Dataset::new(features, target, vec!["x".into()], vec!["0".into(), "1".into()]).unwrap();
        let cv = CrossValidator::new(&d, &EstimatorSpec::logistic(), &folds).unwrap();
        let fold0 = &cv.folds[0];
        let train_mean = fold0.stats[0].0;
        assert!(train_mean < 1.0, "training mean {train_mean} saw test rows");
        // held-out rows all land on one side, so fold 0 scores at chance level
        let score = cv.score(&FeatureMask::ones(1)).unwrap();
        assert!(score < 0.95, "score {score}");
    }
}
