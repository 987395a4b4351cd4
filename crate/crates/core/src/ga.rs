//! Standard generational GA over feature masks: proportional parent
//! selection, single-cutoff crossover, bit-flip mutation and single-elite
//! replacement.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{CrossValidator, ScoreCache};
use crate::experiments::report::{Algorithm, PopulationStats, RunReport};
use crate::mask::FeatureMask;
use crate::parallel::Execution;

/// `alpha * score + (1 - alpha) * (1 - n_selected / n_all)`.
///
/// Stays in [0, 1] for `score` and `alpha` in [0, 1]. With `alpha == 1`
/// it is the score itself.
pub fn fitness_of(score: f64, n_selected: usize, n_all: usize, alpha: f64) -> f64 {
    debug_assert!(n_all >= 1 && n_selected <= n_all);
    let kept = n_selected as f64 / n_all as f64;
    alpha * score + (1.0 - alpha) * (1.0 - kept)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub mask: FeatureMask,
    pub score: f64,
    pub fitness: f64,
}

impl Individual {
    pub fn n_selected(&self) -> usize {
        self.mask.count_ones()
    }
}

/// Ordering used wherever a single best individual is needed: higher
/// fitness first, then fewer selected features.
pub(crate) fn better(a: &Individual, b: &Individual) -> bool {
    a.fitness > b.fitness || (a.fitness == b.fitness && a.n_selected() < b.n_selected())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation: usize,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Highest-fitness individual; ties go to the sparser mask, then to the
    /// earlier position.
    pub fn best(&self) -> &Individual {
        let mut best = &self.individuals[0];
        for ind in &self.individuals[1..] {
            if better(ind, best) {
                best = ind;
            }
        }
        best
    }

    pub fn stats(&self) -> PopulationStats {
        let n = self.individuals.len() as f64;
        let best = self.best();
        PopulationStats {
            index: self.generation,
            best_fitness: best.fitness,
            best_score: best.score,
            best_n_selected: best.n_selected(),
            mean_fitness: self.individuals.iter().map(|i| i.fitness).sum::<f64>() / n,
            mean_score: self.individuals.iter().map(|i| i.score).sum::<f64>() / n,
            mean_n_selected: self.individuals.iter().map(|i| i.n_selected() as f64).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub mutation_rate: f64,
    pub alpha: f64,
    pub generations: usize,
    pub init_density: f64,
    pub seed: u64,
    /// Redraw the second parent until it differs from the first.
    pub distinct_parents: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 20,
            mutation_rate: 0.1,
            alpha: 0.9,
            generations: 20,
            init_density: 0.5,
            seed: 0,
            distinct_parents: false,
        }
    }
}

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::config(format!("{name} must be in [0, 1], got {value}")));
    }
    Ok(())
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        check_unit("mutation rate", self.mutation_rate)?;
        check_unit("alpha", self.alpha)?;
        if !(self.init_density > 0.0 && self.init_density < 1.0) {
            return Err(Error::config(format!(
                "initial density must be in (0, 1), got {}",
                self.init_density
            )));
        }
        Ok(())
    }
}

/// Everything needed to turn masks into evaluated individuals.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    pub dataset: &'a Dataset,
    pub validator: &'a CrossValidator,
    pub execution: Execution,
}

impl<'a> Scorer<'a> {
    pub fn new(dataset: &'a Dataset, validator: &'a CrossValidator) -> Self {
        Scorer {
            dataset,
            validator,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn n_features(&self) -> usize {
        self.dataset.n_features()
    }

    /// Scores every mask (cache first, distinct misses possibly in parallel)
    /// and applies the fitness function. An empty mask gets score 0 and
    /// fitness 0.
    pub fn evaluate_masks(&self, masks: Vec<FeatureMask>, alpha: f64, cache: &ScoreCache) -> Result<Vec<Individual>> {
        let n_all = self.n_features();
        if let Some(bad) = masks.iter().find(|m| m.len() != n_all) {
            return Err(Error::contract(format!(
                "mask of length {} for a dataset with {n_all} features",
                bad.len()
            )));
        }
        let mut scores: Vec<Option<f64>> = Vec::with_capacity(masks.len());
        let mut pending: Vec<FeatureMask> = Vec::new();
        for mask in &masks {
            if mask.none_selected() {
                scores.push(Some(0.0));
                continue;
            }
            let known = cache.lookup(mask);
            if known.is_none() && !pending.contains(mask) {
                pending.push(mask.clone());
            }
            scores.push(known);
        }
        let computed = self.execution.map(&pending, |m| self.validator.score(m));
        for (mask, score) in pending.into_iter().zip(computed) {
            let score = score.map_err(|e| e.context(format!("scoring mask {mask}")))?;
            cache.insert(mask, score);
        }
        Ok(masks
            .into_iter()
            .zip(scores)
            .map(|(mask, score)| {
                if mask.none_selected() {
                    return Individual {
                        mask,
                        score: 0.0,
                        fitness: 0.0,
                    };
                }
                let score = score.or_else(|| cache.peek(&mask)).expect("score computed above");
                let fitness = fitness_of(score, mask.count_ones(), n_all, alpha);
                Individual { mask, score, fitness }
            })
            .collect())
    }
}

/// Random initial masks: each bit set with probability `init_density`; an
/// all-zero draw is redrawn, and after 100 failures one random bit is set.
pub fn init_population<R: Rng>(config: &GaConfig, n_features: usize, rng: &mut R) -> Vec<FeatureMask> {
    (0..config.population_size)
        .map(|_| {
            for _ in 0..100 {
                let mut mask = FeatureMask::zeros(n_features);
                for i in 0..n_features {
                    if rng.gen::<f64>() < config.init_density {
                        mask.set(i, true);
                    }
                }
                if !mask.none_selected() {
                    return mask;
                }
            }
            FeatureMask::from_indices(n_features, &[rng.gen_range(0..n_features)])
        })
        .collect()
}

/// Evaluates masks into a population at the given generation index.
pub fn evaluate(
    masks: Vec<FeatureMask>,
    generation: usize,
    alpha: f64,
    scorer: &Scorer<'_>,
    cache: &ScoreCache,
) -> Result<Population> {
    Ok(Population {
        individuals: scorer.evaluate_masks(masks, alpha, cache)?,
        generation,
    })
}

/// Roulette-wheel index: probability proportional to fitness, uniform when
/// every fitness is zero.
pub fn select_parent_index<R: Rng>(population: &Population, rng: &mut R) -> usize {
    let total: f64 = population.individuals.iter().map(|i| i.fitness).sum();
    if total <= 0.0 {
        return rng.gen_range(0..population.len());
    }
    let ticket = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, ind) in population.individuals.iter().enumerate() {
        if ind.fitness > 0.0 {
            acc += ind.fitness;
            last_positive = i;
            if ticket < acc {
                return i;
            }
        }
    }
    last_positive
}

pub fn select_parent<'p, R: Rng>(population: &'p Population, rng: &mut R) -> &'p Individual {
    &population.individuals[select_parent_index(population, rng)]
}

/// Child takes `first[..cutoff]` and `second[cutoff..]`.
pub fn crossover_at(first: &FeatureMask, second: &FeatureMask, cutoff: usize) -> FeatureMask {
    assert_eq!(first.len(), second.len(), "parents must have equal length");
    let mut child = second.clone();
    for i in 0..cutoff.min(first.len()) {
        child.set(i, first.get(i));
    }
    child
}

/// Single-cutoff recombination with the cutoff uniform on `1..len`, so both
/// parents contribute. A length-1 mask is copied from the first parent.
pub fn crossover<R: Rng>(first: &FeatureMask, second: &FeatureMask, rng: &mut R) -> FeatureMask {
    let len = first.len();
    if len < 2 {
        return first.clone();
    }
    crossover_at(first, second, rng.gen_range(1..len))
}

/// Flips each bit independently with probability `rate`.
pub fn mutate<R: Rng>(mask: &FeatureMask, rate: f64, rng: &mut R) -> FeatureMask {
    let mut out = mask.clone();
    for i in 0..out.len() {
        if rng.gen::<f64>() < rate {
            out.flip(i);
        }
    }
    out
}

fn breed<R: Rng>(population: &Population, config: &GaConfig, rng: &mut R) -> Vec<FeatureMask> {
    (1..population.len())
        .map(|_| {
            let a = select_parent_index(population, rng);
            let mut b = select_parent_index(population, rng);
            if config.distinct_parents {
                for _ in 0..100 {
                    if b != a {
                        break;
                    }
                    b = select_parent_index(population, rng);
                }
            }
            let child = crossover(&population.individuals[a].mask, &population.individuals[b].mask, rng);
            mutate(&child, config.mutation_rate, rng)
        })
        .collect()
}

/// N-1 offspring by select/crossover/mutate, plus the previous best carried
/// over unchanged (and not re-evaluated) at the end.
pub fn next_generation<R: Rng>(
    population: &Population,
    config: &GaConfig,
    scorer: &Scorer<'_>,
    cache: &ScoreCache,
    rng: &mut R,
) -> Result<Population> {
    let children = breed(population, config, rng);
    let mut next = evaluate(children, population.generation + 1, config.alpha, scorer, cache)
        .map_err(|e| e.context(format!("generation {}", population.generation + 1)))?;
    next.individuals.push(population.best().clone());
    Ok(next)
}

/// Seeded stream for a plain GA run.
pub fn ga_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs `config.generations` generations from a random population.
pub fn run_ga(config: &GaConfig, scorer: &Scorer<'_>, cache: &ScoreCache) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let before = cache.stats();
    let degenerate_before = scorer.validator.degenerate_fits();
    let mut rng = ga_rng(config.seed);
    let masks = init_population(config, scorer.n_features(), &mut rng);
    let mut population = evaluate(masks, 0, config.alpha, scorer, cache)?;
    let mut trajectory = vec![population.stats()];
    let mut offspring = 0;
    for _ in 0..config.generations {
        population = next_generation(&population, config, scorer, cache, &mut rng)?;
        offspring += config.population_size as u64 - 1;
        trajectory.push(population.stats());
    }
    let mut report = RunReport::new(Algorithm::Ga, scorer, config.seed, population.best(), trajectory);
    report.config.ga = Some(config.clone());
    report.population = population.individuals.iter().map(|i| i.mask.clone()).collect();
    report.evaluations.record(
        before,
        cache.stats(),
        offspring,
        scorer.validator.degenerate_fits() - degenerate_before,
    );
    report.duration_secs = Some(started.elapsed().as_secs_f64());
    Ok(report)
}
