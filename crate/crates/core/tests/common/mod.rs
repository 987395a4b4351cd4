#![allow(dead_code)]

use fastslow::dataset::{generate_toy, kfold_split, Dataset};
use fastslow::estimator::{CrossValidator, EstimatorSpec};
use fastslow::ga::{Individual, Population, Scorer};
use fastslow::FeatureMask;

/// A dataset with its prepared cross-validator.
pub struct Problem {
    pub data: Dataset,
    pub cv: CrossValidator,
}

impl Problem {
    pub fn new(data: Dataset, spec: &EstimatorSpec, k: usize) -> Self {
        let folds = kfold_split(data.n_samples(), k, 0).unwrap();
        let cv = CrossValidator::new(&data, spec, &folds).unwrap();
        Problem { data, cv }
    }

    pub fn toy(n_samples: usize, n_features: usize, n_significant: usize, seed: u64) -> Self {
        let data = generate_toy(n_samples, n_features, n_significant, 0.5, seed).unwrap();
        Problem::new(data, &EstimatorSpec::logistic(), 5)
    }

    pub fn scorer(&self) -> Scorer<'_> {
        Scorer::new(&self.data, &self.cv)
    }
}

/// Population with the given fitness values (score = fitness) and
/// single-bit masks.
pub fn population(fitness: &[f64], width: usize) -> Population {
    Population {
        individuals: fitness
            .iter()
            .enumerate()
            .map(|(i, &f)| Individual {
                mask: FeatureMask::from_indices(width, &[i % width]),
                score: f,
                fitness: f,
            })
            .collect(),
        generation: 0,
    }
}
