//! Dense numeric datasets, CSV ingestion, the planted-feature toy generator
//! and k-fold index assignment.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::FeatureMask;

/// Column name used for the label when a toy dataset is written to CSV.
pub const DEFAULT_TARGET: &str = "y";

/// Feature matrix with integer class labels.
///
/// Immutable once built, so it can be shared read-only between islands.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    target: Vec<usize>,
    feature_names: Vec<String>,
    class_labels: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shape, finiteness, label range and name
    /// uniqueness. `class_labels[c]` is the external label of class `c`.
    pub fn new(
        features: Array2<f64>,
        target: Vec<usize>,
        feature_names: Vec<String>,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let (n_samples, n_features) = features.dim();
        if n_samples == 0 || n_features == 0 {
            return Err(Error::config(format!(
                "dataset must have at least one sample and one feature, got {n_samples}x{n_features}"
            )));
        }
        if target.len() != n_samples {
            return Err(Error::contract(format!(
                "target has {} entries for {n_samples} samples",
                target.len()
            )));
        }
        if feature_names.len() != n_features {
            return Err(Error::contract(format!(
                "{} feature names for {n_features} columns",
                feature_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::config(format!("duplicate feature name '{name}'")));
            }
        }
        if let Some(((row, col), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::config(format!(
                "non-finite value {v} at row {row}, column '{}'",
                feature_names[col]
            )));
        }
        let n_classes = class_labels.len();
        if let Some(&bad) = target.iter().find(|&&t| t >= n_classes) {
            return Err(Error::contract(format!("label {bad} outside 0..{n_classes}")));
        }
        let distinct: HashSet<usize> = target.iter().copied().collect();
        if distinct.len() < 2 {
            return Err(Error::config("target has a single class"));
        }
        Ok(Dataset {
            features,
            target,
            feature_names,
            class_labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// External label for each dense class index.
    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    /// Columns as contiguous vectors, the layout the estimators train on.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.features
            .axis_iter(Axis(1))
            .map(|c| c.iter().copied().collect())
            .collect()
    }

    /// Writes the dataset as CSV with the label in a trailing `target_name`
    /// column. Values use the shortest round-tripping decimal form.
    pub fn save_csv(&self, path: impl AsRef<Path>, target_name: &str) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(target_name);
        writer.write_record(&header).map_err(csv_err)?;
        let mut record = Vec::with_capacity(header.len());
        for (row, &label) in self.features.rows().into_iter().zip(&self.target) {
            record.clear();
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(self.class_labels[label].clone());
            writer.write_record(&record).map_err(csv_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Labeling rule of the toy problem: 1 iff the mean of the first
/// `n_significant` values is strictly greater than `threshold`.
pub fn toy_label(row: &[f64], n_significant: usize, threshold: f64) -> usize {
    let mean = row[..n_significant].iter().sum::<f64>() / n_significant as f64;
    usize::from(mean > threshold)
}

/// Synthetic benchmark: features i.i.d. uniform on [0, 1), label set by
/// [`toy_label`] on the first `n_significant` columns. The rest is noise.
pub fn generate_toy(
    n_samples: usize,
    n_features: usize,
    n_significant: usize,
    threshold: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::config("n_samples must be at least 1"));
    }
    if n_significant == 0 || n_significant > n_features {
        return Err(Error::config(format!(
            "n_significant must be in 1..={n_features}, got {n_significant}"
        )));
    }
    if !threshold.is_finite() {
        return Err(Error::config("threshold must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n_samples * n_features);
    let mut target = Vec::with_capacity(n_samples);
    let mut row = vec![0.0; n_features];
    for _ in 0..n_samples {
        for v in row.iter_mut() {
            *v = rng.gen::<f64>();
        }
        target.push(toy_label(&row, n_significant, threshold));
        data.extend_from_slice(&row);
    }
    let features = Array2::from_shape_vec((n_samples, n_features), data).expect("shape matches buffer length");
    let names = (0..n_features).map(|j| format!("f{j}")).collect();
    Dataset::new(features, target, names, vec!["0".into(), "1".into()])
        .map_err(|e| e.context(format!("toy dataset ({n_samples} samples, seed {seed})")))
}

/// Reads a CSV file. Every column except `target_column` must hold finite
/// numbers. Numeric targets are mapped to dense classes in ascending order,
/// anything else in order of first appearance.
///
/// Without a header, columns are named `c0`, `c1`, ... and `target_column`
/// may be given either as such a name or as a zero-based index.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let ingest = |message: String| Error::Ingest {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = Vec::new();
    for record in reader.records() {
        records.push(record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?);
    }
    let width = match (header, records.first()) {
        (true, _) => reader
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .len(),
        (false, Some(r)) => r.len(),
        (false, None) => 0,
    };
    let names: Vec<String> = if header {
        reader
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .iter()
            .map(str::to_string)
            .collect()
    } else {
        (0..width).map(|j| format!("c{j}")).collect()
    };
    let target_idx = names
        .iter()
        .position(|n| n == target_column)
        .or_else(|| {
            (!header)
                .then(|| target_column.parse::<usize>().ok())
                .flatten()
                .filter(|&i| i < width)
        })
        .ok_or_else(|| ingest(format!("no column named '{target_column}'")))?;
    if width < 2 {
        return Err(ingest("need at least one feature column besides the target".into()));
    }
    if records.is_empty() {
        return Err(ingest("no data rows".into()));
    }

    let first_data_line = if header { 2 } else { 1 };
    let n_features = width - 1;
    let mut data = Vec::with_capacity(records.len() * n_features);
    let mut raw_target = Vec::with_capacity(records.len());
    for (r, record) in records.iter().enumerate() {
        let line = first_data_line + r;
        for (j, cell) in record.iter().enumerate() {
            if j == target_idx {
                if cell.is_empty() {
                    return Err(ingest(format!(
                        "line {line}: empty target cell in column '{}'",
                        names[j]
                    )));
                }
                raw_target.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| {
                if cell.is_empty() {
                    ingest(format!("line {line}: blank cell in column '{}'", names[j]))
                } else {
                    ingest(format!(
                        "line {line}: non-numeric value '{cell}' in column '{}'",
                        names[j]
                    ))
                }
            })?;
            if !value.is_finite() {
                return Err(ingest(format!(
                    "line {line}: non-finite value '{cell}' in column '{}'",
                    names[j]
                )));
            }
            data.push(value);
        }
    }

    let (target, class_labels) = encode_labels(&raw_target);
    if class_labels.len() < 2 {
        return Err(ingest("target has a single class".into()));
    }
    let mut feature_names = names;
    feature_names.remove(target_idx);
    let features =
        Array2::from_shape_vec((records.len(), n_features), data).expect("csv reader enforces equal row lengths");
    Dataset::new(features, target, feature_names, class_labels).map_err(|e| match e {
        Error::Config(message) | Error::Contract(message) => ingest(message),
        other => other,
    })
}

fn encode_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
    let mut labels: Vec<String> = Vec::new();
    match numeric {
        Some(values) if values.iter().all(|v| v.is_finite()) => {
            let mut order: Vec<usize> = (0..raw.len()).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let mut last: Option<f64> = None;
            for &i in &order {
                if last != Some(values[i]) {
                    labels.push(raw[i].clone());
                    last = Some(values[i]);
                }
            }
            let index: HashMap<u64, usize> = labels
                .iter()
                .enumerate()
                .map(|(c, l)| (l.parse::<f64>().unwrap().to_bits(), c))
                .collect();
            let target = values.iter().map(|v| index[&v.to_bits()]).collect();
            (target, labels)
        }
        _ => {
            let mut index: HashMap<&str, usize> = HashMap::new();
            let target = raw
                .iter()
                .map(|s| {
                    *index.entry(s.as_str()).or_insert_with(|| {
                        labels.push(s.clone());
                        labels.len() - 1
                    })
                })
                .collect();
            (target, labels)
        }
    }
}

/// Assignment of every sample to one of `k` cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of_sample: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_samples(&self) -> usize {
        self.fold_of_sample.len()
    }

    pub fn fold_of_sample(&self) -> &[usize] {
        &self.fold_of_sample
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of_sample {
            sizes[f] += 1;
        }
        sizes
    }

    /// (train, test) sample indices for fold `fold`, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.fold_of_sample.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Shuffled assignment with fold sizes differing by at most one.
pub fn kfold_split(n_samples: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(n_samples, k)?;
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of_sample = vec![0; n_samples];
    for (pos, &i) in order.iter().enumerate() {
        fold_of_sample[i] = pos % k;
    }
    Ok(FoldAssignment { fold_of_sample, k })
}

/// Like [`kfold_split`] but deals each class out round-robin so class
/// proportions are as even as possible across folds.
pub fn stratified_kfold_split(target: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    check_k(target.len(), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = target.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &t) in target.iter().enumerate() {
        by_class[t].push(i);
    }
    let mut fold_of_sample = vec![0; target.len()];
    let mut pos = 0;
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            fold_of_sample[i] = pos % k;
            pos += 1;
        }
    }
    Ok(FoldAssignment { fold_of_sample, k })
}

fn check_k(n_samples: usize, k: usize) -> Result<()> {
    if k < 2 || k > n_samples {
        return Err(Error::config(format!("fold count must be in 2..={n_samples}, got {k}")));
    }
    Ok(())
}

/// Keeps only the columns selected by `mask`, in their original order.
pub fn restrict(dataset: &Dataset, mask: &FeatureMask) -> Result<Dataset> {
    if mask.len() != dataset.n_features() {
        return Err(Error::contract(format!(
            "mask of length {} applied to {} features",
            mask.len(),
            dataset.n_features()
        )));
    }
    if mask.none_selected() {
        return Err(Error::contract("cannot restrict a dataset to an empty mask"));
    }
    let cols = mask.selected();
    let features = dataset.features.select(Axis(1), &cols);
    let names = cols.iter().map(|&j| dataset.feature_names[j].clone()).collect();
    Ok(Dataset {
        features,
        target: dataset.target.clone(),
        feature_names: names,
        class_labels: dataset.class_labels.clone(),
    })
}
