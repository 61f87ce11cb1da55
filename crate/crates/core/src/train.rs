//! Supervised training of the selector: regret loss, Adam, early stopping.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cnf::{parse_dimacs_file, CnfInstance, ParseError};
use crate::dataset::{LabeledDataset, RuntimeRecord};
use crate::graph::{build_graph, feature_schema_hash, FeatureMode, LiteralClauseGraph};
use crate::loss::{regret_loss, regret_loss_grad};
use crate::nn::{
    backward, forward, forward_with_tape, Gradients, ModelConfig, ModelParameters, NnError,
};
use crate::optim::{adam_step, AdamState};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("fold {fold} leaves no usable training data")]
    EmptyFold { fold: usize },
    #[error("instance {instance}: expected {expected} runtimes, found {found}")]
    MissingRuntimes {
        instance: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("feature schema mismatch: checkpoint {checkpoint:#018x}, featurizer {current:#018x}")]
    SchemaMismatch { checkpoint: u64, current: u64 },
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Stop after this many consecutive epochs without validation improvement.
    pub patience: usize,
    /// Fraction of the training split held out for validation.
    pub val_fraction: f64,
    pub seed: u64,
    pub hidden: usize,
    pub layers: usize,
    pub feature_mode: FeatureMode,
    pub homogeneous: bool,
    /// Train the loss on `ln(1+t)` instead of raw seconds.
    pub log_runtime: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            max_epochs: 100,
            batch_size: 32,
            patience: 10,
            val_fraction: 0.2,
            seed: 0,
            hidden: 64,
            layers: 2,
            feature_mode: FeatureMode::CustomPlusPe,
            homogeneous: false,
            log_runtime: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.learning_rate <= 0.0 {
            return Err(TrainError::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(TrainError::InvalidConfig("val_fraction must lie in (0, 1)".into()));
        }
        if self.hidden == 0 {
            return Err(TrainError::InvalidConfig("hidden width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Per-epoch loss history, written as CSV `epoch,train_loss,val_loss`.
#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for e in &self.epochs {
            out.push_str(&format!("{},{},{}\n", e.epoch, e.train_loss, e.val_loss));
        }
        out
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Parameters of the best-validation epoch.
    pub params: ModelParameters,
    pub log: TrainLog,
    pub best_val_loss: f64,
    pub best_epoch: usize,
}

/// Runtimes as seen by the loss: raw seconds, or `ln(1+t)` when configured.
fn loss_times(record: &RuntimeRecord, log_runtime: bool) -> (Vec<f64>, f64) {
    if log_runtime {
        let ts: Vec<f64> = record.runtimes.iter().map(|t| t.ln_1p()).collect();
        let best = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        (ts, best)
    } else {
        (record.runtimes.clone(), record.best_time)
    }
}

/// Trains on every record outside `test_fold`, with graphs already built
/// (one per record, in record order). Deterministic for a fixed config.
pub fn train_with_graphs(
    dataset: &LabeledDataset,
    graphs: &[LiteralClauseGraph],
    test_fold: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    assert_eq!(graphs.len(), dataset.len(), "one graph per record");
    let k = dataset.num_solvers();
    for r in &dataset.records {
        if r.runtimes.len() != k {
            return Err(TrainError::MissingRuntimes {
                instance: r.instance_id.clone(),
                expected: k,
                found: r.runtimes.len(),
            });
        }
    }
    let (_, mut pool) = dataset.fold_split(test_fold);
    if pool.len() < 2 {
        return Err(TrainError::EmptyFold { fold: test_fold });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    pool.shuffle(&mut rng);
    let n_val = ((pool.len() as f64) * config.val_fraction)
        .round()
        .max(1.0)
        .min((pool.len() - 1) as f64) as usize;
    let (val_idx, fit_idx) = pool.split_at(n_val);

    let model_cfg = ModelConfig {
        hidden: config.hidden,
        layers: config.layers,
        num_solvers: k,
        homogeneous: config.homogeneous,
        feature_mode: config.feature_mode,
    };
    let mut params = ModelParameters::init(model_cfg, rng.gen::<u64>());
    let mut log = TrainLog::default();
    if config.max_epochs == 0 {
        return Ok(TrainOutcome {
            params,
            log,
            best_val_loss: f64::INFINITY,
            best_epoch: 0,
        });
    }

    let mut adam = AdamState::new(params.len());
    let mut fit: Vec<usize> = fit_idx.to_vec();
    let mut best: Option<(f64, ModelParameters, usize)> = None;
    let mut stale_epochs = 0usize;

    for epoch in 0..config.max_epochs {
        fit.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in fit.chunks(config.batch_size) {
            let results: Result<Vec<(f64, Gradients)>, NnError> = batch
                .par_iter()
                .map(|&i| {
                    let (dist, tape) = forward_with_tape(&graphs[i], &params)?;
                    let (ts, best_t) = loss_times(&dataset.records[i], config.log_runtime);
                    let value = regret_loss(dist.probs(), &ts, best_t)?;
                    let upstream = regret_loss_grad(dist.probs(), &ts, best_t)?;
                    let grads = backward(&graphs[i], &params, &tape, &upstream)?;
                    Ok((value, grads))
                })
                .collect();
            let results = results?;
            // Sum of per-instance gradients, in batch order, then mean.
            let mut batch_grads = Gradients::zeros(&params);
            let scale = 1.0 / batch.len() as f64;
            for (value, grads) in &results {
                loss_sum += value;
                batch_grads.add_scaled(grads, scale);
            }
            adam_step(&mut params, &batch_grads, &mut adam, config.learning_rate);
        }
        let train_loss = loss_sum / fit.len() as f64;
        let val_loss = mean_regret(dataset, graphs, val_idx, &params, config.log_runtime)?;
        log.epochs.push(EpochStats { epoch, train_loss, val_loss });

        let improved = best.as_ref().map_or(true, |(b, _, _)| val_loss < *b);
        if improved {
            best = Some((val_loss, params.clone(), epoch));
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= config.patience {
                break;
            }
        }
    }

    let (best_val_loss, params, best_epoch) = best.expect("at least one epoch ran");
    Ok(TrainOutcome { params, log, best_val_loss, best_epoch })
}

/// Mean regret loss of `params` over the given record indices.
pub fn mean_regret(
    dataset: &LabeledDataset,
    graphs: &[LiteralClauseGraph],
    indices: &[usize],
    params: &ModelParameters,
    log_runtime: bool,
) -> Result<f64, TrainError> {
    if indices.is_empty() {
        return Ok(0.0);
    }
    let losses: Result<Vec<f64>, NnError> = indices
        .par_iter()
        .map(|&i| {
            let dist = forward(&graphs[i], params)?;
            let (ts, best_t) = loss_times(&dataset.records[i], log_runtime);
            regret_loss(dist.probs(), &ts, best_t)
        })
        .collect();
    Ok(losses?.iter().sum::<f64>() / indices.len() as f64)
}

/// Builds the graphs for every record of a dataset by loading and
/// featurizing its instance files.
pub fn featurize_dataset(
    dataset: &LabeledDataset,
    mode: FeatureMode,
) -> Result<Vec<LiteralClauseGraph>, TrainError> {
    let graphs: Result<Vec<_>, ParseError> = dataset
        .paths
        .par_iter()
        .map(|p| Ok(build_graph(&parse_dimacs_file(p)?, mode)))
        .collect();
    Ok(graphs?)
}

/// Trains from a manifest on disk: loads instances, featurizes, trains.
pub fn train(
    dataset: &LabeledDataset,
    test_fold: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    let graphs = featurize_dataset(dataset, config.feature_mode)?;
    train_with_graphs(dataset, &graphs, test_fold, config)
}

/// Picks the solver with the highest model probability; ties go to the
/// lowest index. Fails if the checkpoint was produced against a different
/// feature schema.
pub fn select_solver(inst: &CnfInstance, params: &ModelParameters) -> Result<usize, SelectError> {
    let current = feature_schema_hash(params.feature_mode());
    if params.feature_schema() != current {
        return Err(SelectError::SchemaMismatch {
            checkpoint: params.feature_schema(),
            current,
        });
    }
    let graph = build_graph(inst, params.feature_mode());
    Ok(forward(&graph, params)?.argmax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RuntimeRecord;
    use crate::synth::{generate, SyntheticSpec};
    use std::path::PathBuf;

    /// 200 random instances where solver 0 strictly dominates.
    fn dominated_dataset() -> (LabeledDataset, Vec<LiteralClauseGraph>) {
        let spec = SyntheticSpec {
            n_instances: 200,
            min_vars: 8,
            max_vars: 20,
            min_ratio: 2.0,
            max_ratio: 4.0,
            length_weights: [0.1, 0.3, 0.4, 0.2, 0.0],
            seed: 42,
        };
        let instances = generate(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut records = Vec::new();
        let mut graphs = Vec::new();
        for inst in &instances {
            let fast = 0.5 + rng.gen_range(0.0..0.2);
            let slow = 5.0 + rng.gen_range(0.0..2.0);
            let slower = 6.0 + rng.gen_range(0.0..2.0);
            records.push(
                RuntimeRecord::new(inst.source_id().to_string(), vec![fast, slow, slower])
                    .unwrap(),
            );
            graphs.push(build_graph(inst, FeatureMode::CustomPlusPe));
        }
        let n = records.len();
        let ds = LabeledDataset::new(
            records,
            vec![PathBuf::new(); n],
            500.0,
            vec!["s0".into(), "s1".into(), "s2".into()],
            3,
            5,
        );
        (ds, graphs)
    }

    fn fast_config() -> TrainConfig {
        TrainConfig {
            hidden: 8,
            max_epochs: 25,
            patience: 6,
            seed: 1,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn learns_planted_dominance() {
        let (ds, graphs) = dominated_dataset();
        let outcome = train_with_graphs(&ds, &graphs, 0, &fast_config()).unwrap();
        let (test_idx, _) = ds.fold_split(0);
        let correct = test_idx
            .iter()
            .filter(|&&i| forward(&graphs[i], &outcome.params).unwrap().argmax() == 0)
            .count();
        assert!(
            correct as f64 >= 0.95 * test_idx.len() as f64,
            "selected the dominant solver on {correct}/{}",
            test_idx.len()
        );
        // Training loss collapses by at least 90% from the first epoch.
        let first = outcome.log.epochs.first().unwrap().train_loss;
        let last = outcome.log.epochs.last().unwrap().train_loss;
        assert!(
            last <= 0.1 * first,
            "train loss {first} -> {last} fell less than 90%"
        );
    }

    #[test]
    fn early_stopping_returns_best_checkpoint() {
        let (ds, graphs) = dominated_dataset();
        let outcome = train_with_graphs(&ds, &graphs, 1, &fast_config()).unwrap();
        for e in &outcome.log.epochs {
            assert!(outcome.best_val_loss <= e.val_loss + 1e-15);
        }
        assert_eq!(
            outcome.best_val_loss,
            outcome.log.epochs[outcome.best_epoch].val_loss
        );
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let (ds, graphs) = dominated_dataset();
        let cfg = TrainConfig { max_epochs: 0, ..fast_config() };
        let outcome = train_with_graphs(&ds, &graphs, 0, &cfg).unwrap();
        assert!(outcome.log.epochs.is_empty());
        // Same initialization as a fresh run with the same seed.
        let again = train_with_graphs(&ds, &graphs, 0, &cfg).unwrap();
        assert_eq!(outcome.params, again.params);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let (ds, graphs) = dominated_dataset();
        let cfg = TrainConfig { max_epochs: 4, ..fast_config() };
        let a = train_with_graphs(&ds, &graphs, 0, &cfg).unwrap();
        let b = train_with_graphs(&ds, &graphs, 0, &cfg).unwrap();
        assert_eq!(
            crate::nn::save_checkpoint(&a.params),
            crate::nn::save_checkpoint(&b.params)
        );
        assert_eq!(a.log.epochs, b.log.epochs);
    }

    #[test]
    fn select_solver_checks_schema() {
        let (ds, graphs) = dominated_dataset();
        let cfg = TrainConfig { max_epochs: 2, ..fast_config() };
        let outcome = train_with_graphs(&ds, &graphs, 0, &cfg).unwrap();
        let spec = SyntheticSpec {
            n_instances: 1,
            min_vars: 8,
            max_vars: 10,
            min_ratio: 2.0,
            max_ratio: 2.0,
            length_weights: [0.0, 0.5, 0.5, 0.0, 0.0],
            seed: 77,
        };
        let inst = generate(&spec).pop().unwrap();
        let chosen = select_solver(&inst, &outcome.params).unwrap();
        assert!(chosen < 3);
        assert_eq!(chosen, select_solver(&inst, &outcome.params).unwrap());

        // Corrupt the stored schema hash via checkpoint bytes.
        let mut bytes = crate::nn::save_checkpoint(&outcome.params);
        bytes[6] ^= 0xff;
        let tampered = crate::nn::load_checkpoint(&bytes).unwrap();
        assert!(matches!(
            select_solver(&inst, &tampered),
            Err(SelectError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn uniform_model_breaks_ties_low() {
        let (ds, graphs) = dominated_dataset();
        let cfg = TrainConfig { max_epochs: 0, ..fast_config() };
        let mut outcome = train_with_graphs(&ds, &graphs, 0, &cfg).unwrap();
        let k = ds.num_solvers();
        outcome.params.set_tensor("head_w", &vec![0.0; 3 * 8 * k]);
        outcome.params.set_tensor("head_b", &vec![0.0; k]);
        assert_eq!(forward(&graphs[0], &outcome.params).unwrap().argmax(), 0);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let bad = TrainConfig { val_fraction: 1.0, ..TrainConfig::default() };
        assert!(matches!(bad.validate(), Err(TrainError::InvalidConfig(_))));
        let bad = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn missing_runtimes_detected() {
        let (mut ds, graphs) = dominated_dataset();
        ds.records[3].runtimes.pop();
        let err = train_with_graphs(&ds, &graphs, 0, &fast_config()).unwrap_err();
        assert!(matches!(err, TrainError::MissingRuntimes { .. }));
    }

    #[test]
    fn empty_fold_detected() {
        let (ds, graphs) = dominated_dataset();
        let one_fold = LabeledDataset::new(
            ds.records.clone(),
            ds.paths.clone(),
            ds.cutoff,
            ds.solver_names.clone(),
            ds.fold_seed,
            1,
        );
        let err = train_with_graphs(&one_fold, &graphs, 0, &fast_config()).unwrap_err();
        assert!(matches!(err, TrainError::EmptyFold { fold: 0 }));
    }
}
