use grass_core::baselines::{best_base_solver, KnnSelector, RidgeSelector, DEFAULT_KNN_K};
use grass_core::dataset::{LabeledDataset, RuntimeRecord};
use grass_core::eval::{evaluate, oracle_selections};
use grass_core::features::{feature_index, global_features};
use grass_core::graph::{build_graph, FeatureMode, LiteralClauseGraph};
use grass_core::nn::forward;
use grass_core::oracle::{oracle_runtimes, OracleSpec, SolverProfile};
use grass_core::synth::{generate, SyntheticSpec};
use grass_core::train::{train_with_graphs, TrainConfig};
use std::path::PathBuf;

fn bench() -> (LabeledDataset, Vec<LiteralClauseGraph>, Vec<usize>, Vec<Vec<f64>>) {
    let mut instances = Vec::new();
    let mut group = Vec::new();
    let w_a = [0.3, 0.7, 0.0, 0.0, 0.0];
    let w_b = [0.0, 0.0, 1.0, 0.0, 0.0];
    let w_c = [0.0, 0.0, 0.0, 0.45, 0.55];
    let lerp = |x: &[f64; 5], y: &[f64; 5], u: f64| {
        let mut w = [0.0; 5];
        for i in 0..5 { w[i] = x[i] * (1.0 - u) + y[i] * u; }
        w
    };
    for j in 0..40usize {
        let weights = if j < 20 { lerp(&w_a, &w_b, j as f64 / 19.0) } else { lerp(&w_b, &w_c, (j - 20) as f64 / 19.0) };
        instances.extend(generate(&SyntheticSpec {
            n_instances: 50, min_vars: 24, max_vars: 56,
            min_ratio: 3.0, max_ratio: 4.6, length_weights: weights, seed: 101 + j as u64,
        }));
        group.extend(std::iter::repeat(j / 14).take(50));
    }
    let horn = feature_index("horn_frac").unwrap();
    let len = feature_index("mean_clause_len").unwrap();
    // Anchors (horn, len): A (0.825, 1.7), B (0.5, 3.0), C (0.2438, 4.55).
    // t0 = (16, 25, 25) at the anchors, t2 = (25, 25, 16), steady 22.
    let spec = OracleSpec {
        seed: 500,
        profiles: vec![
            SolverProfile { name: "s0".into(), base: (7.2558f64).exp(), weights: vec![(horn, -4.0536), (len, -0.6700)], alpha: 0.0, noise_scale: 0.03 },
            SolverProfile { name: "s1".into(), base: 22.0, weights: vec![], alpha: 0.0, noise_scale: 0.03 },
            SolverProfile { name: "s2".into(), base: (7.467f64).exp(), weights: vec![(horn, -3.399), (len, -0.8497)], alpha: 0.0, noise_scale: 0.03 },
        ],
    };
    let mut records = Vec::new();
    let mut graphs = Vec::new();
    let mut feats = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let inst = inst.clone().with_source_id(format!("p{i}"));
        records.push(RuntimeRecord::new(inst.source_id().to_string(), oracle_runtimes(&inst, &spec)).unwrap());
        graphs.push(build_graph(&inst, FeatureMode::CustomPlusPe));
        feats.push(global_features(&inst).to_vec());
    }
    let n = records.len();
    (LabeledDataset::new(records, vec![PathBuf::new(); n], 500.0, spec.solver_names(), 7, 5), graphs, group, feats)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args[1].parse().unwrap();
    let patience: usize = args[2].parse().unwrap();
    let batch: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(32);
    let hidden: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(16);
    let folds: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(1);
    let (ds, graphs, group, feats) = bench();

    let mut counts = [0usize; 3];
    for r in &ds.records { counts[r.best_solver] += 1; }
    eprintln!("label counts: {counts:?}");

    let config = TrainConfig { hidden, layers: 2, max_epochs: epochs, patience, batch_size: batch, seed: 1234, ..TrainConfig::default() };
    let n = ds.len();
    let mut gnn_sel = vec![0usize; n];
    let mut ridge_sel = vec![0usize; n];
    let mut knn_sel = vec![0usize; n];
    let mut single_sel = vec![0usize; n];
    for fold in 0..folds {
        let t0 = std::time::Instant::now();
        let out = train_with_graphs(&ds, &graphs, fold, &config).unwrap();
        let log = &out.log.epochs;
        if fold == 0 {
            for e in log.iter().step_by(8) { eprintln!("epoch {:3}  train {:.4}  val {:.4}", e.epoch, e.train_loss, e.val_loss); }
            eprintln!("last: epoch {:3} train {:.4} val {:.4}", log.last().unwrap().epoch, log.last().unwrap().train_loss, log.last().unwrap().val_loss);
        }
        let (test_idx, train_idx) = ds.fold_split(fold);
        let train_feats: Vec<Vec<f64>> = train_idx.iter().map(|&i| feats[i].clone()).collect();
        let train_recs: Vec<RuntimeRecord> = train_idx.iter().map(|&i| ds.records[i].clone()).collect();
        let ridge = RidgeSelector::fit(&train_feats, &train_recs, 1.0);
        let knn = KnnSelector::fit(&train_feats, &train_recs, DEFAULT_KNN_K);
        let single = best_base_solver(&train_recs);
        for &i in &test_idx {
            gnn_sel[i] = forward(&graphs[i], &out.params).unwrap().argmax();
            ridge_sel[i] = ridge.select(&feats[i]);
            knn_sel[i] = knn.select(&feats[i]);
            single_sel[i] = single;
        }
        eprintln!("fold {fold} done in {:?} (best epoch {}, {} epochs)", t0.elapsed(), out.best_epoch, log.len());

        if fold == 0 {
            for g in 0..3 {
                if let Some(&i) = test_idx.iter().find(|&&i| group[i] == g) {
                    let d = forward(&graphs[i], &out.params).unwrap();
                    eprintln!("group {g} probs: {:?} (best={})", d.probs().iter().map(|p| format!("{p:.2e}")).collect::<Vec<_>>(), ds.records[i].best_solver);
                }
            }
        }
    }
    if folds == ds.n_folds {
        let gnn = evaluate(&gnn_sel, &ds.records, 500.0).unwrap();
        let ridge = evaluate(&ridge_sel, &ds.records, 500.0).unwrap();
        let knn = evaluate(&knn_sel, &ds.records, 500.0).unwrap();
        let single = evaluate(&single_sel, &ds.records, 500.0).unwrap();
        let oracle = evaluate(&oracle_selections(&ds.records), &ds.records, 500.0).unwrap();
        eprintln!("avg: gnn {:.3} ridge {:.3} knn {:.3} single {:.3} oracle {:.3}", gnn.avg_runtime, ridge.avg_runtime, knn.avg_runtime, single.avg_runtime, oracle.avg_runtime);
        eprintln!("acc: gnn {:.3} ridge {:.3} knn {:.3} single {:.3}", gnn.accuracy, ridge.accuracy, knn.accuracy, single.accuracy);
    } else {
        let (test_idx, _) = ds.fold_split(0);
        let recs: Vec<RuntimeRecord> = test_idx.iter().map(|&i| ds.records[i].clone()).collect();
        let sel: Vec<usize> = test_idx.iter().map(|&i| gnn_sel[i]).collect();
        let rep = evaluate(&sel, &recs, 500.0).unwrap();
        let mut selc = [0usize; 3];
        for &s in &sel { selc[s] += 1; }
        eprintln!("fold 0: acc {:.3} avg {:.3} selections {selc:?}", rep.accuracy, rep.avg_runtime);
    }
}
