//! Run and sweep reports, and their JSON/CSV emission.
//!
//! JSON field order follows the struct declarations. Floating-point values
//! are rounded to six significant digits on output. Files are written to a
//! temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::estimator::{CacheStats, EstimatorSpec};
use crate::fast_slow::FastSlowConfig;
use crate::ga::{GaConfig, Individual, Scorer};
use crate::mask::FeatureMask;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ga,
    FastSlow,
}

/// Summary of one population: its best individual and the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    /// Generation (single GA) or outer round (fast/slow) index.
    pub index: usize,
    pub best_fitness: f64,
    pub best_score: f64,
    pub best_n_selected: usize,
    pub mean_fitness: f64,
    pub mean_score: f64,
    pub mean_n_selected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub fast: PopulationStats,
    pub slow: PopulationStats,
    pub merged: PopulationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestIndividual {
    pub mask: FeatureMask,
    pub selected_indices: Vec<usize>,
    pub selected_features: Vec<String>,
    pub n_selected: usize,
    pub score: f64,
    pub fitness: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationStats {
    /// Offspring produced and evaluated (cache hits included).
    pub offspring: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    /// Fold fits whose training labels had a single class.
    pub degenerate_fits: u64,
}

impl EvaluationStats {
    pub(crate) fn record(&mut self, before: CacheStats, after: CacheStats, offspring: u64, degenerate: u64) {
        self.offspring = offspring;
        self.cache_hits = after.hits - before.hits;
        self.cache_misses = after.misses - before.misses;
        self.degenerate_fits = degenerate;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub n_samples: usize,
    pub n_features: usize,
    pub class_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub estimator: EstimatorSpec,
    pub folds: usize,
    pub ga: Option<GaConfig>,
    pub fast_slow: Option<FastSlowConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config: ConfigEcho,
    pub dataset: DatasetInfo,
    /// Initial population followed by one entry per generation (or round).
    pub trajectory: Vec<PopulationStats>,
    /// Per-island statistics, fast/slow runs only.
    pub rounds: Vec<RoundRecord>,
    pub best: BestIndividual,
    /// Masks of the final population.
    pub population: Vec<FeatureMask>,
    pub evaluations: EvaluationStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_secs: Option<f64>,
}

impl RunReport {
    pub(crate) fn new(
        algorithm: Algorithm,
        scorer: &Scorer<'_>,
        seed: u64,
        best: &Individual,
        trajectory: Vec<PopulationStats>,
    ) -> Self {
        let names = scorer.dataset.feature_names();
        let selected_indices = best.mask.selected();
        RunReport {
            schema_version: SCHEMA_VERSION,
            algorithm,
            seed,
            config: ConfigEcho {
                estimator: scorer.validator.spec().clone(),
                folds: scorer.validator.k(),
                ga: None,
                fast_slow: None,
            },
            dataset: DatasetInfo {
                n_samples: scorer.dataset.n_samples(),
                n_features: scorer.dataset.n_features(),
                class_labels: scorer.dataset.class_labels().to_vec(),
            },
            trajectory,
            rounds: Vec::new(),
            best: BestIndividual {
                mask: best.mask.clone(),
                selected_features: selected_indices.iter().map(|&j| names[j].clone()).collect(),
                selected_indices,
                n_selected: best.n_selected(),
                score: best.score,
                fitness: best.fitness,
            },
            population: Vec::new(),
            evaluations: EvaluationStats::default(),
            duration_secs: None,
        }
    }

    /// One line for terminals: score, feature count and feature names.
    pub fn summary_line(&self) -> String {
        format!(
            "best score {:.4} (fitness {:.4}) with {} feature(s): {}",
            self.best.score,
            self.best.fitness,
            self.best.n_selected,
            self.best.selected_features.join(", ")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    MutationRate,
    Alpha,
}

/// Final result of one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub score: f64,
    pub fitness: f64,
    pub n_selected: usize,
    pub mask: FeatureMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub mean_score: f64,
    pub std_score: f64,
    pub mean_n_selected: f64,
    pub std_n_selected: f64,
    pub runs: Vec<RunOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub axis: SweepAxis,
    pub ensemble_size: usize,
    pub base_seed: u64,
    pub baseline_score: Option<f64>,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

/// Something that can be written as a report.
pub trait Report: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
}

fn num(x: f64) -> String {
    round_significant(x, 6).to_string()
}

impl Report for RunReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "index",
            "best_fitness",
            "best_score",
            "best_n_selected",
            "mean_fitness",
            "mean_score",
            "mean_n_selected",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.trajectory
            .iter()
            .map(|s| {
                vec![
                    s.index.to_string(),
                    num(s.best_fitness),
                    num(s.best_score),
                    s.best_n_selected.to_string(),
                    num(s.mean_fitness),
                    num(s.mean_score),
                    num(s.mean_n_selected),
                ]
            })
            .collect()
    }
}

impl Report for SweepSummary {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            match self.axis {
                SweepAxis::MutationRate => "mutation_rate",
                SweepAxis::Alpha => "alpha",
            },
            "mean_score",
            "std_score",
            "mean_n_selected",
            "std_n_selected",
            "runs",
            "baseline_score",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let baseline = self.baseline_score.map(num).unwrap_or_default();
        self.points
            .iter()
            .map(|p| {
                vec![
                    num(p.value),
                    num(p.mean_score),
                    num(p.std_score),
                    num(p.mean_n_selected),
                    num(p.std_n_selected),
                    p.runs.len().to_string(),
                    baseline.clone(),
                ]
            })
            .collect()
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64 number"), 6);
            if let Some(r) = serde_json::Number::from_f64(x) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Renders a report in the requested format.
pub fn render_report<R: Report>(report: &R, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut value = serde_json::to_value(report).map_err(|e| Error::contract(e.to_string()))?;
            round_floats(&mut value);
            let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::contract(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let fail = |e: csv::Error| Error::contract(e.to_string());
            writer.write_record(report.csv_header()).map_err(fail)?;
            for row in report.csv_rows() {
                writer.write_record(&row).map_err(fail)?;
            }
            let bytes = writer.into_inner().map_err(|e| Error::contract(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Writes a report atomically (temporary file in the target directory,
/// then rename).
pub fn emit_report<R: Report>(report: &R, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(report, format)?;
    write_atomic(path, text.as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let fail = |message: String| Error::Report {
        path: path.to_path_buf(),
        message,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(e.to_string()))?;
    tmp.write_all(bytes).map_err(|e| fail(e.to_string()))?;
    tmp.as_file().sync_all().map_err(|e| fail(e.to_string()))?;
    tmp.persist(path).map_err(|e| fail(e.error.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(round_significant(0.123456789, 6), 0.123457);
        assert_eq!(round_significant(12345.6789, 6), 12345.7);
        assert_eq!(round_significant(0.0, 6), 0.0);
        assert_eq!(round_significant(1e-9 * 1.23456789, 6), 1.23457e-9);
    }

    fn summary() -> SweepSummary {
        SweepSummary {
            schema_version: SCHEMA_VERSION,
            axis: SweepAxis::Alpha,
            ensemble_size: 1,
            base_seed: 3,
            baseline_score: Some(0.98765432),
            points: [0.5, 1.0]
                .iter()
                .map(|&v| SweepPoint {
                    value: v,
                    mean_score: 0.912345678,
                    std_score: 0.0,
                    mean_n_selected: 11.0,
                    std_n_selected: 0.0,
                    runs: vec![RunOutcome {
                        seed: 3,
                        score: 0.912345678,
                        fitness: 0.9,
                        n_selected: 11,
                        mask: FeatureMask::parse("1101").unwrap(),
                    }],
                })
                .collect(),
        }
    }

    #[test]
    fn csv_summary_has_one_row_per_value() {
        let text = render_report(&summary(), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("alpha,mean_score"));
        assert_eq!(lines[1], "0.5,0.912346,0,11,0,1,0.987654");
    }

    #[test]
    fn json_round_trip_after_rounding() {
        let text = render_report(&summary(), ReportFormat::Json).unwrap();
        let parsed: SweepSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.points.len(), 2);
        assert_eq!(parsed.points[0].mean_score, 0.912346);
        assert_eq!(parsed.points[0].runs[0].mask.to_bit_string(), "1101");
        // re-rendering the parsed value is a fixed point
        assert_eq!(render_report(&parsed, ReportFormat::Json).unwrap(), text);
    }

    #[test]
    fn unwritable_path_is_reported() {
        let err = emit_report(&summary(), ReportFormat::Json, "/nonexistent-dir/x/report.json").unwrap_err();
        assert!(matches!(err, Error::Report { .. }));
    }
}
