//! Feature selection by two concurrently evolving genetic algorithms.
//!
//! A chromosome is a [`FeatureMask`]; its fitness mixes the cross-validated
//! accuracy of a classifier trained on the selected columns with the
//! fraction of columns dropped:
//!
//! ```text
//! fitness = alpha * score + (1 - alpha) * (1 - n_selected / n_features)
//! ```
//!
//! [`ga::run_ga`] is the plain generational GA. [`fast_slow::run_fast_slow`]
//! runs two copies of it side by side, one with a high mutation rate for
//! exploration and one with a low rate for exploitation, and keeps the best
//! half of their pooled populations after every round.
//!
//! ```
//! use fastslow::{dataset, estimator, fast_slow, ga};
//!
//! let data = dataset::generate_toy(300, 8, 3, 0.5, 1).unwrap();
//! let folds = dataset::kfold_split(data.n_samples(), 5, 0).unwrap();
//! let cv = estimator::CrossValidator::new(&data, &estimator::EstimatorSpec::logistic(), &folds).unwrap();
//! let scorer = ga::Scorer::new(&data, &cv);
//! let config = fast_slow::FastSlowConfig {
//!     base: ga::GaConfig { population_size: 6, alpha: 0.9, ..Default::default() },
//!     outer_rounds: 2,
//!     inner_generations: 2,
//!     ..Default::default()
//! };
//! let report = fast_slow::run_fast_slow(&config, &scorer, &estimator::ScoreCache::new()).unwrap();
//! assert!(report.best.score > 0.5);
//! ```

pub mod dataset;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod fast_slow;
pub mod ga;
mod linalg;
pub mod mask;
pub mod parallel;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use mask::FeatureMask;
pub use parallel::Execution;
