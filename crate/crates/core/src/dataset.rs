//! Labeled datasets: per-instance solver runtimes, manifest files, folds.
//!
//! A dataset on disk is a CSV manifest `instance_id,path,t_1,...,t_K` plus a
//! flat key-value sidecar (`<manifest>.cfg`) holding the cutoff, solver
//! names, fold seed and fold count. Fold assignment is recomputed from the
//! sidecar seed: a seeded shuffle within each best-solver class, dealt
//! round-robin, so label distribution stays balanced across folds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::KvConfig;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("manifest {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("record {0}: runtimes must be positive and complete")]
    BadRuntimes(String),
    #[error("sidecar config: {0}")]
    Sidecar(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Measured (cutoff-censored) runtimes of every portfolio solver on one
/// instance. `best_solver` is the argmin, lowest index on ties.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRecord {
    pub instance_id: String,
    pub runtimes: Vec<f64>,
    pub best_time: f64,
    pub best_solver: usize,
}

impl RuntimeRecord {
    pub fn new(instance_id: impl Into<String>, runtimes: Vec<f64>) -> Result<Self, DatasetError> {
        let instance_id = instance_id.into();
        if runtimes.is_empty() || runtimes.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(DatasetError::BadRuntimes(instance_id));
        }
        let mut best_solver = 0;
        for (k, &t) in runtimes.iter().enumerate() {
            if t < runtimes[best_solver] {
                best_solver = k;
            }
        }
        let best_time = runtimes[best_solver];
        Ok(Self { instance_id, runtimes, best_time, best_solver })
    }

    /// Solver indices achieving the best time (ties included).
    pub fn optimal_set(&self) -> Vec<usize> {
        self.runtimes
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == self.best_time)
            .map(|(k, _)| k)
            .collect()
    }
}

/// A manifest of labeled instances with fold assignments.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub records: Vec<RuntimeRecord>,
    /// Instance file paths, parallel to `records`.
    pub paths: Vec<PathBuf>,
    pub cutoff: f64,
    pub solver_names: Vec<String>,
    pub fold_seed: u64,
    pub n_folds: usize,
    /// Fold index per record.
    pub folds: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(
        records: Vec<RuntimeRecord>,
        paths: Vec<PathBuf>,
        cutoff: f64,
        solver_names: Vec<String>,
        fold_seed: u64,
        n_folds: usize,
    ) -> Self {
        assert_eq!(records.len(), paths.len());
        assert!(n_folds >= 1);
        let folds = assign_folds(&records, n_folds, fold_seed);
        Self { records, paths, cutoff, solver_names, fold_seed, n_folds, folds }
    }

    pub fn num_solvers(&self) -> usize {
        self.solver_names.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record indices inside / outside the given fold.
    pub fn fold_split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for (i, &f) in self.folds.iter().enumerate() {
            if f == fold {
                inside.push(i);
            } else {
                outside.push(i);
            }
        }
        (inside, outside)
    }
}

/// Stratified fold assignment: shuffle record indices within each
/// best-solver class, then deal them round-robin over folds.
pub fn assign_folds(records: &[RuntimeRecord], n_folds: usize, seed: u64) -> Vec<usize> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_class.entry(r.best_solver).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0usize; records.len()];
    let mut next = 0usize;
    for (_, mut members) in by_class {
        members.shuffle(&mut rng);
        for idx in members {
            folds[idx] = next % n_folds;
            next += 1;
        }
    }
    folds
}

fn sidecar_path(manifest: &Path) -> PathBuf {
    let mut p = manifest.as_os_str().to_owned();
    p.push(".cfg");
    PathBuf::from(p)
}

/// Writes `manifest.csv` and its `.cfg` sidecar.
pub fn save_manifest(dataset: &LabeledDataset, path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["instance_id".to_string(), "path".to_string()];
    header.extend((1..=dataset.num_solvers()).map(|k| format!("t_{k}")));
    w.write_record(&header)?;
    for (record, p) in dataset.records.iter().zip(&dataset.paths) {
        let mut row = vec![record.instance_id.clone(), p.display().to_string()];
        row.extend(record.runtimes.iter().map(|t| format!("{t}")));
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut cfg = KvConfig::new();
    cfg.set("cutoff", dataset.cutoff);
    cfg.set("solvers", dataset.solver_names.join(","));
    cfg.set("fold_seed", dataset.fold_seed);
    cfg.set("n_folds", dataset.n_folds);
    cfg.save(&sidecar_path(path), "dataset sidecar")?;
    Ok(())
}

/// Loads a manifest and its sidecar; recomputes fold assignments from the
/// sidecar's seed.
pub fn load_manifest(path: &Path) -> Result<LabeledDataset, DatasetError> {
    let malformed = |message: String| DatasetError::Malformed {
        path: path.to_path_buf(),
        message,
    };
    let cfg = KvConfig::load(&sidecar_path(path))?;
    let cutoff: f64 = cfg.require_parsed("cutoff")?;
    let solver_names = cfg
        .get_list("solvers")
        .ok_or_else(|| malformed("sidecar missing `solvers`".into()))?;
    let fold_seed: u64 = cfg.require_parsed("fold_seed")?;
    let n_folds: usize = cfg.require_parsed("n_folds")?;

    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = 2 + solver_names.len();
    if headers.len() != expected {
        return Err(malformed(format!(
            "expected {expected} columns for {} solvers, found {}",
            solver_names.len(),
            headers.len()
        )));
    }
    let mut records = Vec::new();
    let mut paths = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != expected {
            return Err(malformed(format!("row with {} fields", row.len())));
        }
        let id = row[0].to_string();
        let runtimes: Vec<f64> = row
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| malformed(format!("bad runtime in record {id}")))?;
        records.push(RuntimeRecord::new(id, runtimes)?);
        paths.push(PathBuf::from(&row[1]));
    }
    Ok(LabeledDataset::new(
        records,
        paths,
        cutoff,
        solver_names,
        fold_seed,
        n_folds,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, runtimes: &[f64]) -> RuntimeRecord {
        RuntimeRecord::new(id, runtimes.to_vec()).unwrap()
    }

    #[test]
    fn best_solver_is_argmin_with_low_tie() {
        let r = record("a", &[3.0, 1.0, 1.0]);
        assert_eq!(r.best_solver, 1);
        assert_eq!(r.best_time, 1.0);
        assert_eq!(r.optimal_set(), vec![1, 2]);
    }

    #[test]
    fn rejects_nonpositive_runtimes() {
        assert!(RuntimeRecord::new("a", vec![1.0, 0.0]).is_err());
        assert!(RuntimeRecord::new("a", vec![]).is_err());
        assert!(RuntimeRecord::new("a", vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn folds_partition_and_stratify() {
        let mut records = Vec::new();
        for i in 0..50 {
            // Solver 0 best on even ids, solver 1 on odd.
            let runtimes = if i % 2 == 0 { vec![1.0, 2.0] } else { vec![2.0, 1.0] };
            records.push(record(&format!("i{i}"), &runtimes));
        }
        let folds = assign_folds(&records, 5, 7);
        assert_eq!(folds.len(), 50);
        for f in 0..5 {
            let members: Vec<usize> =
                (0..50).filter(|&i| folds[i] == f).collect();
            assert_eq!(members.len(), 10);
            let class0 = members.iter().filter(|&&i| records[i].best_solver == 0).count();
            assert_eq!(class0, 5, "fold {f} unbalanced");
        }
        // Deterministic.
        assert_eq!(folds, assign_folds(&records, 5, 7));
        assert_ne!(folds, assign_folds(&records, 5, 8));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let dataset = LabeledDataset::new(
            vec![record("a", &[1.5, 2.0]), record("b", &[4.0, 0.25])],
            vec![PathBuf::from("x/a.cnf"), PathBuf::from("x/b.cnf")],
            500.0,
            vec!["s0".into(), "s1".into()],
            11,
            2,
        );
        let path = dir.path().join("manifest.csv");
        save_manifest(&dataset, &path).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded.records, dataset.records);
        assert_eq!(loaded.paths, dataset.paths);
        assert_eq!(loaded.cutoff, 500.0);
        assert_eq!(loaded.solver_names, dataset.solver_names);
        assert_eq!(loaded.folds, dataset.folds);
    }

    #[test]
    fn manifest_rejects_wrong_column_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "instance_id,path,t_1\na,a.cnf,1.0\n").unwrap();
        let mut cfg = KvConfig::new();
        cfg.set("cutoff", 10.0);
        cfg.set("solvers", "s0,s1");
        cfg.set("fold_seed", 0);
        cfg.set("n_folds", 2);
        cfg.save(&sidecar_path(&path), "").unwrap();
        assert!(matches!(
            load_manifest(&path),
            Err(DatasetError::Malformed { .. })
        ));
    }
}
