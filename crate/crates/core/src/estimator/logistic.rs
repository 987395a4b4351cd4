//! L2-penalised logistic regression on standardised columns, one-vs-rest
//! for more than two classes.

use crate::linalg::{axpy, cholesky_solve, dot, sum};

use super::{EstimatorSpec, LrSolver};

/// Per-column centring and scaling learned from training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(columns: &[&[f64]]) -> Self {
        let (means, scales) = columns.iter().map(|c| column_stats(c)).unzip();
        Standardizer { means, scales }
    }

    pub fn apply(&self, columns: &[&[f64]]) -> Vec<Vec<f64>> {
        columns
            .iter()
            .enumerate()
            .map(|(j, c)| standardize(c, self.means[j], self.scales[j]))
            .collect()
    }
}

/// Population mean and standard deviation; a constant column gets scale 1.
pub(crate) fn column_stats(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = sum(col) / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let scale = var.sqrt();
    (mean, if scale > 0.0 { scale } else { 1.0 })
}

pub(crate) fn standardize(col: &[f64], mean: f64, scale: f64) -> Vec<f64> {
    col.iter().map(|v| (v - mean) / scale).collect()
}

/// One binary model per scored class. With exactly two training classes a
/// single model scores the second class against the first.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    /// Classes present in the training labels, ascending.
    pub classes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.standardizer.means.len()
    }

    /// Predicts from already standardised columns.
    pub(crate) fn predict_standardized(&self, columns: &[&[f64]], n_rows: usize) -> Vec<usize> {
        let decisions: Vec<Vec<f64>> = self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, &b)| decision(columns, w, b, n_rows))
            .collect();
        if self.classes.len() == 2 {
            return decisions[0]
                .iter()
                .map(|&z| if z > 0.0 { self.classes[1] } else { self.classes[0] })
                .collect();
        }
        (0..n_rows)
            .map(|i| {
                let mut best = 0;
                for c in 1..self.classes.len() {
                    if decisions[c][i] > decisions[best][i] {
                        best = c;
                    }
                }
                self.classes[best]
            })
            .collect()
    }
}

fn decision(columns: &[&[f64]], w: &[f64], b: f64, n_rows: usize) -> Vec<f64> {
    let mut z = vec![b; n_rows];
    for (col, &wj) in columns.iter().zip(w) {
        axpy(wj, col, &mut z);
    }
    z
}

/// Fits on standardised training columns. `classes` lists the (at least
/// two) classes present in `target`, ascending.
pub(crate) fn fit_standardized(
    standardizer: Standardizer,
    columns: &[&[f64]],
    target: &[usize],
    classes: Vec<usize>,
    spec: &EstimatorSpec,
) -> LogisticModel {
    let scored: &[usize] = if classes.len() == 2 { &classes[1..] } else { &classes };
    let (weights, intercepts) = scored
        .iter()
        .map(|&c| {
            let y: Vec<f64> = target.iter().map(|&t| f64::from(u8::from(t == c))).collect();
            match spec.lr_solver {
                LrSolver::Newton => newton(columns, &y, spec.lr_l2, spec.lr_max_newton_iter),
                LrSolver::GradientDescent => {
                    gradient_descent(columns, &y, spec.lr_l2, spec.lr_learning_rate, spec.lr_epochs)
                }
            }
        })
        .unzip();
    LogisticModel {
        standardizer,
        classes,
        weights,
        intercepts,
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn objective(z: &[f64], y: &[f64], w: &[f64], l2: f64) -> f64 {
    let n = y.len() as f64;
    let loss: f64 = z.iter().zip(y).map(|(&zi, &yi)| softplus(zi) - yi * zi).sum();
    loss / n + 0.5 * l2 * dot(w, w)
}

/// Full-batch gradient descent from zero weights.
fn gradient_descent(columns: &[&[f64]], y: &[f64], l2: f64, lr: f64, epochs: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let inv_n = 1.0 / n as f64;
    let mut w = vec![0.0; columns.len()];
    let mut b = 0.0;
    let mut residual = vec![0.0; n];
    for _ in 0..epochs {
        let z = decision(columns, &w, b, n);
        for ((r, &zi), &yi) in residual.iter_mut().zip(&z).zip(y) {
            *r = sigmoid(zi) - yi;
        }
        for (wj, col) in w.iter_mut().zip(columns) {
            let g = dot(col, &residual) * inv_n + l2 * *wj;
            *wj -= lr * g;
        }
        b -= lr * sum(&residual) * inv_n;
    }
    (w, b)
}

const GRAM_BLOCK: usize = 256;

/// Upper triangle of `X^T diag(s) X` into `out[a * dim + c]` (c >= a), plus
/// the column sums of `diag(s) X` into `out[a * dim + k]`. Rows are processed
/// in fixed blocks so each block's columns stay in cache.
fn weighted_gram(columns: &[&[f64]], s: &[f64], scratch: &mut [f64], out: &mut [f64], dim: usize) {
    let k = columns.len();
    let n = s.len();
    for a in 0..k {
        for c in a..=k {
            out[a * dim + c] = 0.0;
        }
    }
    let mut start = 0;
    while start < n {
        let end = (start + GRAM_BLOCK).min(n);
        let len = end - start;
        let sb = &s[start..end];
        for a in 0..k {
            let u = &mut scratch[a * GRAM_BLOCK..a * GRAM_BLOCK + len];
            for ((ui, &si), &xi) in u.iter_mut().zip(sb).zip(&columns[a][start..end]) {
                *ui = si * xi;
            }
        }
        for a in 0..k {
            let u = &scratch[a * GRAM_BLOCK..a * GRAM_BLOCK + len];
            for c in a..k {
                out[a * dim + c] += dot(u, &columns[c][start..end]);
            }
            out[a * dim + k] += sum(u);
        }
        start = end;
    }
}

/// Rows used for the curvature matrix when the training set is large:
/// every `stride`-th row, at most `HESSIAN_ROWS` of them.
const HESSIAN_ROWS: usize = 2048;

struct HessianRows {
    index: Vec<usize>,
    columns: Vec<Vec<f64>>,
}

impl HessianRows {
    fn new(columns: &[&[f64]], n: usize) -> Option<Self> {
        if n <= HESSIAN_ROWS {
            return None;
        }
        let stride = n.div_ceil(HESSIAN_ROWS);
        let index: Vec<usize> = (0..n).step_by(stride).collect();
        let columns = columns.iter().map(|c| index.iter().map(|&i| c[i]).collect()).collect();
        Some(HessianRows { index, columns })
    }
}

/// Fills `hessian` with `X^T diag(s) X / m + ridge` (intercept unpenalised)
/// over the `m` given rows.
fn curvature_system(columns: &[&[f64]], s: &[f64], ridge: f64, scratch: &mut [f64], hessian: &mut [f64]) {
    let k = columns.len();
    let dim = k + 1;
    let inv_m = 1.0 / s.len() as f64;
    weighted_gram(columns, s, scratch, hessian, dim);
    for a in 0..k {
        for c in a..k {
            let h = hessian[a * dim + c] * inv_m;
            hessian[a * dim + c] = h;
            hessian[c * dim + a] = h;
        }
        hessian[a * dim + a] += ridge;
        let h = hessian[a * dim + k] * inv_m;
        hessian[a * dim + k] = h;
        hessian[k * dim + a] = h;
    }
    hessian[k * dim + k] = sum(s) * inv_m + 1e-12;
}

/// Damped Newton iterations on the penalised cross-entropy with exact
/// gradients. On large training sets the curvature matrix comes from a
/// fixed stride subsample of rows (falling back to all rows if that system
/// is singular); the iteration still converges to the same optimum.
/// Steps are damped by Armijo backtracking. The intercept is not penalised.
fn newton(columns: &[&[f64]], y: &[f64], l2: f64, max_iter: usize) -> (Vec<f64>, f64) {
    const TOL: f64 = 1e-6;
    let n = y.len();
    let k = columns.len();
    let dim = k + 1;
    let inv_n = 1.0 / n as f64;
    // a vanishing ridge keeps the system solvable when l2 == 0
    let ridge = l2.max(1e-10);

    let mut w = vec![0.0; k];
    let mut b = 0.0;
    let mut z = vec![0.0; n];
    let mut current = objective(&z, y, &w, l2);
    let mut residual = vec![0.0; n];
    let mut curvature = vec![0.0; n];
    let mut weighted = vec![0.0; k * GRAM_BLOCK];
    let mut hessian = vec![0.0; dim * dim];
    let mut grad = vec![0.0; dim];
    let sketch = HessianRows::new(columns, n);
    let mut sketch_curvature = vec![0.0; sketch.as_ref().map_or(0, |r| r.index.len())];

    for _ in 0..max_iter {
        for i in 0..n {
            let p = sigmoid(z[i]);
            residual[i] = p - y[i];
            curvature[i] = p * (1.0 - p);
        }
        for j in 0..k {
            grad[j] = dot(columns[j], &residual) * inv_n + l2 * w[j];
        }
        grad[k] = sum(&residual) * inv_n;

        let step = match &sketch {
            Some(rows) => {
                for (c, &i) in sketch_curvature.iter_mut().zip(&rows.index) {
                    *c = curvature[i];
                }
                let sketch_refs: Vec<&[f64]> = rows.columns.iter().map(Vec::as_slice).collect();
                curvature_system(&sketch_refs, &sketch_curvature, ridge, &mut weighted, &mut hessian);
                cholesky_solve(&hessian, &grad, dim)
            }
            None => None,
        };
        let step = match step {
            Some(step) => step,
            None => {
                curvature_system(columns, &curvature, ridge, &mut weighted, &mut hessian);
                match cholesky_solve(&hessian, &grad, dim) {
                    Some(step) => step,
                    None => break,
                }
            }
        };
        let decrement = dot(&step, &grad);
        if decrement <= 0.0 || !decrement.is_finite() {
            break;
        }

        let mut t = 1.0;
        let mut accepted = false;
        let mut trial_w = vec![0.0; k];
        let mut trial_z = vec![0.0; n];
        for _ in 0..30 {
            for j in 0..k {
                trial_w[j] = w[j] - t * step[j];
            }
            let trial_b = b - t * step[k];
            trial_z.iter_mut().for_each(|v| *v = trial_b);
            for (col, &wj) in columns.iter().zip(&trial_w) {
                axpy(wj, col, &mut trial_z);
            }
            let value = objective(&trial_z, y, &trial_w, l2);
            if value <= current - 1e-4 * t * decrement {
                w.copy_from_slice(&trial_w);
                b = trial_b;
                std::mem::swap(&mut z, &mut trial_z);
                current = value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || t * decrement * 0.5 < TOL {
            break;
        }
    }
    (w, b)
}
