//! Feature-vector baselines: per-solver ridge runtime regression and
//! k-nearest-neighbor classification, both over standardized
//! [`global_features`](crate::features::global_features) vectors, plus the
//! single-best-solver baseline.

use crate::dataset::RuntimeRecord;

/// Z-score standardization fitted on training rows. Zero-variance features
/// are centered but not scaled.
#[derive(Debug, Clone)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "cannot standardize an empty training set");
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in rows {
            for (j, &x) in row.iter().enumerate() {
                let d = x - mean[j];
                var[j] += d * d;
            }
        }
        let scale = var
            .iter()
            .map(|&v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }
}

/// Solves `a x = b` for symmetric positive-definite `a` (row-major) by
/// Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor != 0.0 {
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for j in row + 1..n {
            s -= a[row * n + j] * x[j];
        }
        x[row] = s / a[row * n + row];
    }
    x
}

/// One ridge regressor per solver, predicting raw runtime from standardized
/// features; selection is the argmin of predicted runtimes.
#[derive(Debug, Clone)]
pub struct RidgeSelector {
    standardizer: Standardizer,
    /// Per solver: coefficient vector over standardized features.
    coefs: Vec<Vec<f64>>,
    /// Per solver: unpenalized intercept.
    intercepts: Vec<f64>,
}

impl RidgeSelector {
    /// Fits with regularization `lambda` (> 0 keeps the system
    /// non-singular). Feature rows are raw; standardization is fitted here.
    pub fn fit(features: &[Vec<f64>], records: &[RuntimeRecord], lambda: f64) -> Self {
        assert_eq!(features.len(), records.len());
        assert!(lambda > 0.0, "ridge needs a positive regularizer");
        let standardizer = Standardizer::fit(features);
        let xs: Vec<Vec<f64>> = features.iter().map(|r| standardizer.apply(r)).collect();
        let n = xs.len();
        let dim = xs[0].len();
        let k = records[0].runtimes.len();

        // Center the standardized design (defensive: already near-centered)
        // so the intercept is just the target mean.
        let mut xtx = vec![0.0; dim * dim];
        for x in &xs {
            for i in 0..dim {
                for j in 0..dim {
                    xtx[i * dim + j] += x[i] * x[j];
                }
            }
        }
        for i in 0..dim {
            xtx[i * dim + i] += lambda;
        }

        let mut coefs = Vec::with_capacity(k);
        let mut intercepts = Vec::with_capacity(k);
        for solver in 0..k {
            let y_mean =
                records.iter().map(|r| r.runtimes[solver]).sum::<f64>() / n as f64;
            let mut xty = vec![0.0; dim];
            for (x, r) in xs.iter().zip(records) {
                let y = r.runtimes[solver] - y_mean;
                for (slot, &xi) in xty.iter_mut().zip(x) {
                    *slot += xi * y;
                }
            }
            let w = solve_linear(xtx.clone(), xty);
            intercepts.push(y_mean);
            coefs.push(w);
        }
        Self { standardizer, coefs, intercepts }
    }

    /// Predicted runtime per solver.
    pub fn predict(&self, features: &[f64]) -> Vec<f64> {
        let x = self.standardizer.apply(features);
        self.coefs
            .iter()
            .zip(&self.intercepts)
            .map(|(w, &b)| b + w.iter().zip(&x).map(|(wi, xi)| wi * xi).sum::<f64>())
            .collect()
    }

    /// Solver with the shortest predicted runtime; ties to the lowest index.
    pub fn select(&self, features: &[f64]) -> usize {
        let preds = self.predict(features);
        let mut best = 0;
        for (k, &p) in preds.iter().enumerate() {
            if p < preds[best] {
                best = k;
            }
        }
        best
    }
}

/// k-nearest-neighbor classifier over standardized features: majority vote
/// of the neighbors' best solvers. Distance ties prefer the lower training
/// index, vote ties the lower solver index.
#[derive(Debug, Clone)]
pub struct KnnSelector {
    standardizer: Standardizer,
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    num_solvers: usize,
    pub k: usize,
}

pub const DEFAULT_KNN_K: usize = 9;

impl KnnSelector {
    pub fn fit(features: &[Vec<f64>], records: &[RuntimeRecord], k: usize) -> Self {
        assert_eq!(features.len(), records.len());
        assert!(!records.is_empty(), "knn needs a nonempty training set");
        let standardizer = Standardizer::fit(features);
        let points = features.iter().map(|r| standardizer.apply(r)).collect();
        let labels = records.iter().map(|r| r.best_solver).collect();
        let num_solvers = records[0].runtimes.len();
        Self { standardizer, points, labels, num_solvers, k }
    }

    pub fn select(&self, features: &[f64]) -> usize {
        let x = self.standardizer.apply(features);
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let take = self.k.min(order.len());
        let mut votes = vec![0usize; self.num_solvers];
        for &(_, i) in &order[..take] {
            votes[self.labels[i]] += 1;
        }
        let mut best = 0;
        for (s, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = s;
            }
        }
        best
    }
}

/// Index of the solver with the lowest mean runtime over the given records.
pub fn best_base_solver(records: &[RuntimeRecord]) -> usize {
    assert!(!records.is_empty());
    let k = records[0].runtimes.len();
    let mut best = 0;
    let mut best_mean = f64::INFINITY;
    for solver in 0..k {
        let mean =
            records.iter().map(|r| r.runtimes[solver]).sum::<f64>() / records.len() as f64;
        if mean < best_mean {
            best_mean = mean;
            best = solver;
        }
    }
    best
}
