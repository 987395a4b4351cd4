use serde::{Deserialize, Serialize};

use super::report::{RunOutcome, SweepAxis, SweepPoint, SweepSummary, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::estimator::{CrossValidator, ScoreCache};
use crate::fast_slow::{run_fast_slow, FastSlowConfig};
use crate::ga::{check_unit, run_ga, GaConfig, Scorer};
use crate::mask::FeatureMask;

/// Problem sizes for the toy studies. `Full` uses the benchmark's 10000
/// samples and 50-run ensembles; `Quick` shrinks samples to 1000 and the
/// ensemble to 15 runs. Both use N = 20 and a 20-generation budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Quick,
    Full,
}

impl Preset {
    pub fn n_samples(self) -> usize {
        match self {
            Preset::Quick => 1_000,
            Preset::Full => 10_000,
        }
    }

    pub fn runs(self) -> usize {
        match self {
            Preset::Quick => 15,
            Preset::Full => 50,
        }
    }

    pub fn population_size(self) -> usize {
        20
    }

    pub fn generations(self) -> usize {
        20
    }

    pub fn outer_rounds(self) -> usize {
        4
    }

    pub fn inner_generations(self) -> usize {
        5
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quick" => Ok(Preset::Quick),
            "full" => Ok(Preset::Full),
            other => Err(format!("unknown preset '{other}' (expected quick or full)")),
        }
    }
}

/// Mutation rates 0.01, 0.03, ..., 0.99.
pub fn default_mutation_grid() -> Vec<f64> {
    (0..50).map(|i| (1 + 2 * i) as f64 / 100.0).collect()
}

/// Cross-validated score with every feature selected.
pub fn baseline_no_selection(validator: &CrossValidator) -> Result<f64> {
    validator.score(&FeatureMask::ones(validator.n_features()))
}

/// Mean and population standard deviation. Values are summed in sorted
/// order so the result does not depend on ensemble order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / n).sqrt())
}

fn outcome(report: &super::RunReport) -> RunOutcome {
    RunOutcome {
        seed: report.seed,
        score: report.best.score,
        fitness: report.best.fitness,
        n_selected: report.best.n_selected,
        mask: report.best.mask.clone(),
    }
}

/// `runs` single-GA runs with seeds `base_seed + i`, each with a fresh cache.
pub fn ga_ensemble(config: &GaConfig, runs: usize, base_seed: u64, scorer: &Scorer<'_>) -> Result<Vec<RunOutcome>> {
    let seeds: Vec<u64> = (0..runs as u64).map(|i| base_seed + i).collect();
    scorer
        .execution
        .map(&seeds, |&seed| {
            let config = GaConfig { seed, ..config.clone() };
            run_ga(&config, scorer, &ScoreCache::new())
                .map(|r| outcome(&r))
                .map_err(|e| {
                    e.context(format!(
                        "GA run with mutation rate {} and seed {seed}",
                        config.mutation_rate
                    ))
                })
        })
        .into_iter()
        .collect()
}

/// `runs` fast/slow runs with seeds `base_seed + i`, each with a fresh cache.
pub fn fast_slow_ensemble(
    config: &FastSlowConfig,
    runs: usize,
    base_seed: u64,
    scorer: &Scorer<'_>,
) -> Result<Vec<RunOutcome>> {
    let seeds: Vec<u64> = (0..runs as u64).map(|i| base_seed + i).collect();
    scorer
        .execution
        .map(&seeds, |&seed| {
            let mut config = config.clone();
            config.base.seed = seed;
            run_fast_slow(&config, scorer, &ScoreCache::new())
                .map(|r| outcome(&r))
                .map_err(|e| {
                    e.context(format!(
                        "fast/slow run with alpha {} and seed {seed}",
                        config.base.alpha
                    ))
                })
        })
        .into_iter()
        .collect()
}

fn point(value: f64, runs: Vec<RunOutcome>) -> SweepPoint {
    let scores: Vec<f64> = runs.iter().map(|r| r.score).collect();
    let counts: Vec<f64> = runs.iter().map(|r| r.n_selected as f64).collect();
    let (mean_score, std_score) = mean_std(&scores);
    let (mean_n_selected, std_n_selected) = mean_std(&counts);
    SweepPoint {
        value,
        mean_score,
        std_score,
        mean_n_selected,
        std_n_selected,
        runs,
    }
}

fn check_sweep(values: &[f64], runs: usize, name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(format!("{name} sweep needs at least one value")));
    }
    if runs == 0 {
        return Err(Error::config("runs per value must be at least 1"));
    }
    values.iter().try_for_each(|&v| check_unit(name, v))
}

/// Single-GA ensembles over mutation rates. Every rate reuses the same
/// seeds, so points are paired.
pub fn mutation_sweep(
    mu_values: &[f64],
    runs_per_value: usize,
    ga: &GaConfig,
    base_seed: u64,
    scorer: &Scorer<'_>,
) -> Result<SweepSummary> {
    check_sweep(mu_values, runs_per_value, "mutation rate")?;
    let points = mu_values
        .iter()
        .map(|&mu| {
            let config = GaConfig {
                mutation_rate: mu,
                ..ga.clone()
            };
            ga_ensemble(&config, runs_per_value, base_seed, scorer).map(|runs| point(mu, runs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSummary {
        schema_version: SCHEMA_VERSION,
        axis: SweepAxis::MutationRate,
        ensemble_size: runs_per_value,
        base_seed,
        baseline_score: Some(baseline_no_selection(scorer.validator)?),
        points,
    })
}

/// Fast/slow ensembles over alpha values, paired by seed.
pub fn alpha_sweep(
    alpha_values: &[f64],
    runs_per_value: usize,
    fast_slow: &FastSlowConfig,
    base_seed: u64,
    scorer: &Scorer<'_>,
) -> Result<SweepSummary> {
    check_sweep(alpha_values, runs_per_value, "alpha")?;
    let points = alpha_values
        .iter()
        .map(|&alpha| {
            let mut config = fast_slow.clone();
            config.base.alpha = alpha;
            fast_slow_ensemble(&config, runs_per_value, base_seed, scorer).map(|runs| point(alpha, runs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepSummary {
        schema_version: SCHEMA_VERSION,
        axis: SweepAxis::Alpha,
        ensemble_size: runs_per_value,
        base_seed,
        baseline_score: Some(baseline_no_selection(scorer.validator)?),
        points,
    })
}
