//! Two islands evolve copies of one population with a high ("fast") and a
//! low ("slow") mutation rate; after every `inner_generations` generations
//! the 2N individuals are pooled and the best N survive.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::ScoreCache;
use crate::experiments::report::{Algorithm, RoundRecord, RunReport};
use crate::ga::{check_unit, evaluate, init_population, next_generation, GaConfig, Individual, Population, Scorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastSlowConfig {
    /// Population size, alpha, init density and seed; its mutation rate is
    /// unused.
    pub base: GaConfig,
    pub mu_fast: f64,
    pub mu_slow: f64,
    pub inner_generations: usize,
    pub outer_rounds: usize,
}

impl Default for FastSlowConfig {
    fn default() -> Self {
        FastSlowConfig {
            base: GaConfig::default(),
            mu_fast: 1.0,
            mu_slow: 0.1,
            inner_generations: 5,
            outer_rounds: 4,
        }
    }
}

impl FastSlowConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        check_unit("fast mutation rate", self.mu_fast)?;
        check_unit("slow mutation rate", self.mu_slow)?;
        if self.outer_rounds == 0 {
            return Err(Error::config("outer rounds must be at least 1"));
        }
        if self.mu_slow > self.mu_fast {
            log::warn!(
                "slow mutation rate {} exceeds fast rate {}; the islands swap roles",
                self.mu_slow,
                self.mu_fast
            );
        }
        Ok(())
    }

    /// Total generations each island runs.
    pub fn generation_budget(&self) -> usize {
        self.outer_rounds * self.inner_generations
    }
}

/// Island identifiers used to derive random streams.
pub const FAST_ISLAND: u64 = 0;
pub const SLOW_ISLAND: u64 = 1;

/// Random stream owned by one island in one round. Stream 0 of the seed is
/// reserved for the initial population.
pub fn island_rng(seed: u64, round: usize, island: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + 2 * round as u64 + island);
    rng
}

/// `generations` applications of the standard generation step with the
/// given mutation rate; everything else comes from `base`.
pub fn evolve_island(
    population: Population,
    mutation_rate: f64,
    generations: usize,
    base: &GaConfig,
    scorer: &Scorer<'_>,
    cache: &ScoreCache,
    rng: &mut ChaCha8Rng,
) -> Result<Population> {
    let config = GaConfig {
        mutation_rate,
        ..base.clone()
    };
    let mut population = population;
    for _ in 0..generations {
        population = next_generation(&population, &config, scorer, cache, rng)?;
    }
    Ok(population)
}

/// Keeps the best N of the pooled 2N individuals. Order: fitness
/// descending, then fewer selected features, then pool position (fast
/// island first). Duplicates are kept.
pub fn merge_select(fast: &Population, slow: &Population) -> Result<Population> {
    if fast.len() != slow.len() || fast.is_empty() {
        return Err(Error::contract(format!(
            "cannot merge populations of sizes {} and {}",
            fast.len(),
            slow.len()
        )));
    }
    let width = fast.individuals[0].mask.len();
    if fast
        .individuals
        .iter()
        .chain(&slow.individuals)
        .any(|i| i.mask.len() != width)
    {
        return Err(Error::contract("merged populations have different mask lengths"));
    }
    let mut pool: Vec<&Individual> = fast.individuals.iter().chain(&slow.individuals).collect();
    // stable sort keeps pool position as the final tie-breaker
    pool.sort_by(|a, b| {
        b.fitness
            .total_cmp(&a.fitness)
            .then_with(|| a.n_selected().cmp(&b.n_selected()))
    });
    Ok(Population {
        individuals: pool.into_iter().take(fast.len()).cloned().collect(),
        generation: fast.generation.max(slow.generation),
    })
}

/// Runs the two-island scheme for `outer_rounds` rounds.
///
/// Each island works on a private copy of `cache` that is merged back after
/// the round, so results and counters do not depend on which island
/// finishes first or whether they run concurrently.
pub fn run_fast_slow(config: &FastSlowConfig, scorer: &Scorer<'_>, cache: &ScoreCache) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let before = cache.stats();
    let degenerate_before = scorer.validator.degenerate_fits();
    let base = &config.base;

    let mut init_rng = ChaCha8Rng::seed_from_u64(base.seed);
    init_rng.set_stream(0);
    let masks = init_population(base, scorer.n_features(), &mut init_rng);
    let mut population = evaluate(masks, 0, base.alpha, scorer, cache)?;
    let mut trajectory = vec![population.stats()];
    let mut rounds = Vec::with_capacity(config.outer_rounds);

    for round in 0..config.outer_rounds {
        let fast_cache = cache.snapshot();
        let slow_cache = cache.snapshot();
        let (fast, slow) = scorer.execution.join(
            || {
                let mut rng = island_rng(base.seed, round, FAST_ISLAND);
                evolve_island(
                    population.clone(),
                    config.mu_fast,
                    config.inner_generations,
                    base,
                    scorer,
                    &fast_cache,
                    &mut rng,
                )
            },
            || {
                let mut rng = island_rng(base.seed, round, SLOW_ISLAND);
                evolve_island(
                    population.clone(),
                    config.mu_slow,
                    config.inner_generations,
                    base,
                    scorer,
                    &slow_cache,
                    &mut rng,
                )
            },
        );
        let fast = fast.map_err(|e| e.context(format!("fast island, round {round}")))?;
        let slow = slow.map_err(|e| e.context(format!("slow island, round {round}")))?;
        cache.absorb(fast_cache);
        cache.absorb(slow_cache);

        let mut merged = merge_select(&fast, &slow)?;
        merged.generation = round + 1;
        let mut fast_stats = fast.stats();
        let mut slow_stats = slow.stats();
        fast_stats.index = round + 1;
        slow_stats.index = round + 1;
        rounds.push(RoundRecord {
            round: round + 1,
            fast: fast_stats,
            slow: slow_stats,
            merged: merged.stats(),
        });
        trajectory.push(merged.stats());
        population = merged;
    }

    let offspring = 2 * (config.generation_budget() * (base.population_size - 1)) as u64;
    let mut report = RunReport::new(Algorithm::FastSlow, scorer, base.seed, population.best(), trajectory);
    report.config.fast_slow = Some(config.clone());
    report.rounds = rounds;
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
