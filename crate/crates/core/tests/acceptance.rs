//! Acceptance suite: one test per release criterion. Each test prints a
//! `PASS criterion N` line on success (visible with `--nocapture`); the
//! test harness itself reports the per-criterion pass/fail status.
//!
//! Run with `cargo test --test acceptance`.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use grass_core::baselines::{best_base_solver, KnnSelector, RidgeSelector, DEFAULT_KNN_K};
use grass_core::cnf::{
    self, parse_dimacs, permute, serialize_dimacs, CnfInstance, ParseError, PermutationKind,
    PermutationSpec,
};
use grass_core::dataset::{save_manifest, LabeledDataset, RuntimeRecord};
use grass_core::eval::{evaluate, oracle_selections, selections_to_csv};
use grass_core::features::{feature_index, global_features};
use grass_core::graph::{build_graph, positional_encoding, FeatureMode, LiteralClauseGraph};
use grass_core::loss::{regret_loss, regret_loss_grad};
use grass_core::nn::{
    backward, forward, forward_with_tape, load_checkpoint, save_checkpoint, ModelConfig,
    ModelParameters,
};
use grass_core::oracle::{oracle_runtimes, OracleSpec, SolverProfile};
use grass_core::runner::{label, LabelMode, LabelOptions};
use grass_core::study::permute_study;
use grass_core::synth::{generate, generate_to_dir, SyntheticSpec};
use grass_core::train::{train_with_graphs, TrainConfig};

fn t1() -> CnfInstance {
    parse_dimacs(b"p cnf 3 3\n1 -2 0\n-1 2 3 0\n-1 0").unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Criterion 1: analytic gradients of the regret loss match central finite
/// differences (step 1e-4) with relative error < 1e-3 on 3 seeds, h=4, L=2.
#[test]
fn criterion_1_gradient_correctness() {
    let start = Instant::now();
    let graph = build_graph(&t1(), FeatureMode::CustomPlusPe);
    let runtimes = [2.5, 0.8, 4.0];
    let best = 0.8;
    let loss_of = |params: &ModelParameters| -> f64 {
        let dist = forward(&graph, params).unwrap();
        regret_loss(dist.probs(), &runtimes, best).unwrap()
    };

    let mut checked = 0usize;
    for seed in [11u64, 22, 33] {
        let cfg = ModelConfig {
            hidden: 4,
            layers: 2,
            num_solvers: 3,
            homogeneous: false,
            feature_mode: FeatureMode::CustomPlusPe,
        };
        let mut params = ModelParameters::init(cfg, seed);
        let (dist, tape) = forward_with_tape(&graph, &params).unwrap();
        let upstream = regret_loss_grad(dist.probs(), &runtimes, best).unwrap();
        let grads = backward(&graph, &params, &tape, &upstream).unwrap();

        let eps = 1e-4;
        for idx in 0..params.len() {
            let orig = params.data()[idx];
            params.data_mut()[idx] = orig + eps;
            let hi_x = params.data()[idx];
            let hi = loss_of(&params);
            params.data_mut()[idx] = orig - eps;
            let lo_x = params.data()[idx];
            let lo = loss_of(&params);
            params.data_mut()[idx] = orig;

            let fd = (hi - lo) / (hi_x - lo_x);
            let an = grads.data()[idx];
            let magnitude = an.abs().max(fd.abs());
            if magnitude < 1e-8 {
                assert!((fd - an).abs() < 1e-8, "seed {seed} param {idx}: {an} vs {fd}");
            } else {
                let rel = (fd - an).abs() / magnitude;
                assert!(
                    rel < 1e-3,
                    "seed {seed} param {idx}: analytic {an}, fd {fd}, rel {rel}"
                );
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "PASS criterion 1: {checked} parameter gradients matched finite differences \
         (rel < 1e-3) in {elapsed:?}"
    );
}

/// Criterion 2: regret-loss contract.
#[test]
fn criterion_2_regret_loss_contract() {
    // One-hot on an optimal solver: exactly zero.
    assert_eq!(regret_loss(&[0.0, 1.0, 0.0], &[3.0, 1.0, 2.0], 1.0).unwrap(), 0.0);
    // Hand-derived value.
    let loss = regret_loss(&[0.5, 0.5], &[1.0, 10.0], 1.0).unwrap();
    assert!((loss - 20.25).abs() < 1e-12, "{loss}");
    // Nonnegative on 10,000 random draws.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let k = rng.gen_range(2..8);
        let mut p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0f64..1.0)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let t: Vec<f64> = (0..k).map(|_| rng.gen_range(1e-3..1e3)).collect();
        let best = t.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(regret_loss(&p, &t, best).unwrap() >= 0.0);
    }
    println!("PASS criterion 2: loss zero at one-hot optimum, 20.25 on the hand case, >= 0 on 10000 draws");
}

/// Criterion 3: permutation invariances of the forward pass over 50 random
/// instances.
#[test]
fn criterion_3_permutation_invariances() {
    let instances = generate(&SyntheticSpec {
        n_instances: 50,
        min_vars: 6,
        max_vars: 40,
        min_ratio: 2.0,
        max_ratio: 4.5,
        length_weights: [0.1, 0.25, 0.3, 0.2, 0.15],
        seed: 314,
    });
    let mk_params = |mode: FeatureMode| {
        ModelParameters::init(
            ModelConfig {
                hidden: 16,
                layers: 2,
                num_solvers: 3,
                homogeneous: false,
                feature_mode: mode,
            },
            99,
        )
    };
    let with_pe = mk_params(FeatureMode::CustomPlusPe);
    let no_pe = mk_params(FeatureMode::CustomNoPe);

    let mut pe_changed = 0usize;
    let mut nontrivial = 0usize;
    for (i, inst) in instances.iter().enumerate() {
        let base_pe = forward(&build_graph(inst, FeatureMode::CustomPlusPe), &with_pe).unwrap();
        let base_nope = forward(&build_graph(inst, FeatureMode::CustomNoPe), &no_pe).unwrap();

        // Variable relabeling leaves the output unchanged.
        let relabeled = permute(
            inst,
            PermutationSpec { kind: PermutationKind::VariableShuffle, seed: i as u64 },
        );
        let out = forward(&build_graph(&relabeled, FeatureMode::CustomPlusPe), &with_pe).unwrap();
        let diff = max_abs_diff(out.probs(), base_pe.probs());
        assert!(diff < 5e-6, "instance {i}: relabeling moved output by {diff}");

        // Clause shuffling with PE disabled leaves the output unchanged.
        let shuffled = permute(
            inst,
            PermutationSpec { kind: PermutationKind::ClauseShuffle, seed: i as u64 },
        );
        let out = forward(&build_graph(&shuffled, FeatureMode::CustomNoPe), &no_pe).unwrap();
        let diff = max_abs_diff(out.probs(), base_nope.probs());
        assert!(diff < 5e-6, "instance {i}: clause shuffle (no PE) moved output by {diff}");

        // With PE enabled, nontrivial shuffles change some clause feature
        // vector.
        if shuffled.clauses() != inst.clauses() {
            nontrivial += 1;
            let g0 = build_graph(inst, FeatureMode::CustomPlusPe);
            let g1 = build_graph(&shuffled, FeatureMode::CustomPlusPe);
            let changed = (0..g0.n_clauses())
                .any(|c| g0.clause_feature_row(c) != g1.clause_feature_row(c));
            if changed {
                pe_changed += 1;
            }
        }
    }
    assert!(nontrivial >= 40, "only {nontrivial} nontrivial shuffles");
    assert!(
        pe_changed as f64 >= 0.9 * nontrivial as f64,
        "PE moved clause features on {pe_changed}/{nontrivial} shuffles"
    );
    println!(
        "PASS criterion 3: relabeling and PE-free shuffles invariant on 50 instances; \
         PE features moved on {pe_changed}/{nontrivial} nontrivial shuffles"
    );
}

/// Criterion 4: the worked feature values for the three-clause example
/// match exactly (rationals compared at 1e-9 after f32 conversion).
#[test]
fn criterion_4_feature_fidelity() {
    let inst = t1();
    let graph = build_graph(&inst, FeatureMode::CustomPlusPe);
    let third = 1.0f64 / 3.0;
    let close = |got: f32, want: f64| ((got as f64) - (want as f32) as f64).abs() < 1e-9;

    // Positive literal x1: degree 1/3, Horn share 1/3, ratio 1/(2+1).
    let row = graph.pos_lit_feature_row(0);
    assert!(close(row[0], third) && close(row[1], third) && close(row[2], third));
    // Negative literal x1: degree 2/3, Horn share 1/3, ratio 2/(1+1).
    let row = graph.neg_lit_feature_row(0);
    assert!(close(row[0], 2.0 * third) && close(row[1], third) && close(row[2], 1.0));

    // Clause 2 (index 1): not Horn, degree 1, ternary, fractions 2/3 and
    // 1/3, ratio 2/(1+1), PE(1).
    let row = graph.clause_feature_row(1);
    for (got, want) in row.iter().zip([0.0, 1.0, 0.0, 1.0, 2.0 * third, third, 1.0]) {
        assert!(close(*got, want), "{got} vs {want}");
    }
    for (got, want) in row[7..].iter().zip(positional_encoding(1)) {
        assert!(close(*got, want));
    }
    // Clause 3 (index 2): Horn, degree 1/3, neither binary nor ternary,
    // all-negative, ratio 0, PE(2).
    let row = graph.clause_feature_row(2);
    for (got, want) in row.iter().zip([1.0, third, 0.0, 0.0, 0.0, 1.0, 0.0]) {
        assert!(close(*got, want), "{got} vs {want}");
    }
    for (got, want) in row[7..].iter().zip(positional_encoding(2)) {
        assert!(close(*got, want));
    }

    // PE spot values.
    let pe = positional_encoding(1);
    assert!((pe[0] - 0.841471).abs() < 1e-6);
    assert!((pe[1] - 0.540302).abs() < 1e-6);
    assert!((pe[2] - 0.157827).abs() < 1e-6);
    assert_eq!(positional_encoding(0), [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);

    // Graph shape.
    assert_eq!(graph.n_nodes(), 9);
    assert_eq!(graph.n_lit_clause_edges(), 6);
    assert_eq!(graph.n_pos_neg_edges(), 3);

    // Global features.
    let f = global_features(&inst);
    let idx = |n: &str| feature_index(n).unwrap();
    assert_eq!(f[idx("num_vars")], 3.0);
    assert_eq!(f[idx("num_clauses")], 3.0);
    assert_eq!(f[idx("clause_var_ratio")], 1.0);
    assert!((f[idx("horn_frac")] - 2.0 * third).abs() < 1e-9);
    assert!((f[idx("binary_frac")] - third).abs() < 1e-9);
    assert!((f[idx("ternary_frac")] - third).abs() < 1e-9);
    assert_eq!(f[idx("mean_clause_len")], 2.0);

    // Canonical serialization.
    assert_eq!(serialize_dimacs(&inst), "p cnf 3 3\n1 -2 0\n-1 2 3 0\n-1 0\n");
    println!("PASS criterion 4: all worked feature values match exactly");
}

/// The planted-rule benchmark for criterion 5: three instance families with
/// well-separated Horn-clause fractions, and an oracle whose best solver is
/// decided by which side of the Horn-fraction thresholds an instance falls.
fn planted_benchmark() -> (LabeledDataset, Vec<CnfInstance>) {
    let mut instances = Vec::new();
    let groups = [
        (700usize, [0.15, 0.85, 0.0, 0.0, 0.0], 101u64), // horn-heavy
        (700, [0.0, 0.0, 1.0, 0.0, 0.0], 102),           // ternary
        (600, [0.0, 0.0, 0.0, 0.55, 0.45], 103),         // long clauses
    ];
    for (count, weights, seed) in groups {
        instances.extend(generate(&SyntheticSpec {
            n_instances: count,
            min_vars: 24,
            max_vars: 56,
            min_ratio: 3.0,
            max_ratio: 4.6,
            length_weights: weights,
            seed,
        }));
    }
    let spec = planted_oracle();
    let mut records = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter_mut().enumerate() {
        *inst = inst.clone().with_source_id(format!("planted-{i:04}"));
        let runtimes = oracle_runtimes(inst, &spec);
        assert!(runtimes.iter().all(|&t| t < 500.0));
        records.push(RuntimeRecord::new(inst.source_id().to_string(), runtimes).unwrap());
    }
    let n = records.len();
    let dataset = LabeledDataset::new(
        records,
        vec![PathBuf::new(); n],
        500.0,
        spec.solver_names(),
        7,
        5,
    );
    (dataset, instances)
}

/// Solver 0 is fastest on horn-heavy instances, solver 2 on horn-light
/// ones, solver 1 is a steady allrounder that wins the middle band.
fn planted_oracle() -> OracleSpec {
    let horn = feature_index("horn_frac").unwrap();
    OracleSpec {
        seed: 500,
        profiles: vec![
            SolverProfile {
                name: "horn-sprinter".into(),
                base: 0.5 * (6.0f64 * 0.8).exp(),
                weights: vec![(horn, -6.0)],
                alpha: 0.0,
                noise_scale: 0.03,
            },
            SolverProfile {
                name: "steady".into(),
                base: 0.9,
                weights: vec![],
                alpha: 0.0,
                noise_scale: 0.03,
            },
            SolverProfile {
                name: "mixed-sprinter".into(),
                base: 0.5 * (-6.0f64 * 0.256).exp(),
                weights: vec![(horn, 6.0)],
                alpha: 0.0,
                noise_scale: 0.03,
            },
        ],
    }
}

/// Criterion 5: on the 2000-instance planted benchmark, five-fold training
/// beats the single-best-solver baseline by >= 5% average runtime, reaches
/// >= 80% selection accuracy, and does not lose to ridge or kNN on average
/// runtime.
#[test]
fn criterion_5_learning_signal() {
    let start = Instant::now();
    let (dataset, instances) = planted_benchmark();
    let n = dataset.len();
    let graphs: Vec<LiteralClauseGraph> = instances
        .iter()
        .map(|inst| build_graph(inst, FeatureMode::CustomPlusPe))
        .collect();
    let feats: Vec<Vec<f64>> = instances.iter().map(|i| global_features(i).to_vec()).collect();

    let config = TrainConfig {
        hidden: 16,
        layers: 2,
        max_epochs: 40,
        patience: 8,
        seed: 1234,
        ..TrainConfig::default()
    };

    let mut gnn_sel = vec![usize::MAX; n];
    let mut ridge_sel = vec![usize::MAX; n];
    let mut knn_sel = vec![usize::MAX; n];
    let mut best_base_sel = vec![usize::MAX; n];
    for fold in 0..dataset.n_folds {
        let (test_idx, train_idx) = dataset.fold_split(fold);
        let outcome = train_with_graphs(&dataset, &graphs, fold, &config).unwrap();

        let train_feats: Vec<Vec<f64>> = train_idx.iter().map(|&i| feats[i].clone()).collect();
        let train_recs: Vec<RuntimeRecord> =
            train_idx.iter().map(|&i| dataset.records[i].clone()).collect();
        let ridge = RidgeSelector::fit(&train_feats, &train_recs, 1.0);
        let knn = KnnSelector::fit(&train_feats, &train_recs, DEFAULT_KNN_K);
        let single = best_base_solver(&train_recs);

        for &i in &test_idx {
            gnn_sel[i] = forward(&graphs[i], &outcome.params).unwrap().argmax();
            ridge_sel[i] = ridge.select(&feats[i]);
            knn_sel[i] = knn.select(&feats[i]);
            best_base_sel[i] = single;
        }
    }

    let gnn = evaluate(&gnn_sel, &dataset.records, dataset.cutoff).unwrap();
    let ridge = evaluate(&ridge_sel, &dataset.records, dataset.cutoff).unwrap();
    let knn = evaluate(&knn_sel, &dataset.records, dataset.cutoff).unwrap();
    let single = evaluate(&best_base_sel, &dataset.records, dataset.cutoff).unwrap();
    let oracle = evaluate(&oracle_selections(&dataset.records), &dataset.records, dataset.cutoff)
        .unwrap();

    println!(
        "  avg runtime: gnn {:.3} | ridge {:.3} | knn {:.3} | single-best {:.3} | oracle {:.3}",
        gnn.avg_runtime, ridge.avg_runtime, knn.avg_runtime, single.avg_runtime,
        oracle.avg_runtime
    );
    println!(
        "  accuracy:    gnn {:.3} | ridge {:.3} | knn {:.3} | single-best {:.3}",
        gnn.accuracy, ridge.accuracy, knn.accuracy, single.accuracy
    );

    assert!(gnn.accuracy >= 0.80, "(a) accuracy {:.3} < 0.80", gnn.accuracy);
    assert!(
        gnn.avg_runtime <= 0.95 * single.avg_runtime,
        "(b) {:.3} vs single-best {:.3}",
        gnn.avg_runtime,
        single.avg_runtime
    );
    assert!(
        gnn.avg_runtime <= ridge.avg_runtime,
        "(c) lost to ridge: {:.4} vs {:.4}",
        gnn.avg_runtime,
        ridge.avg_runtime
    );
    assert!(
        gnn.avg_runtime <= knn.avg_runtime,
        "(c) lost to knn: {:.4} vs {:.4}",
        gnn.avg_runtime,
        knn.avg_runtime
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1800.0, "took {elapsed:?}");
    println!(
        "PASS criterion 5: accuracy {:.3}, avg runtime {:.3}s vs single-best {:.3}s, \
         ridge {:.3}s, knn {:.3}s ({elapsed:?})",
        gnn.accuracy, gnn.avg_runtime, single.avg_runtime, ridge.avg_runtime, knn.avg_runtime
    );
}

/// Criterion 6: metric definitions on the worked example plus the oracle
/// lower bound on random runtime tables.
#[test]
fn criterion_6_metrics_oracle() {
    let records = vec![
        RuntimeRecord::new("a", vec![1.0, 10.0]).unwrap(),
        RuntimeRecord::new("b", vec![5.0, 2.0]).unwrap(),
    ];
    let report = evaluate(&[0, 0], &records, 4.0).unwrap();
    assert_eq!(report.avg_runtime, 3.0);
    assert_eq!(report.solved_pct, 50.0);
    assert_eq!(report.accuracy, 0.5);
    assert_eq!(report.cost_of_wrong, 3.0);

    let oracle_report = evaluate(&oracle_selections(&records), &records, 4.0).unwrap();
    assert_eq!(oracle_report.accuracy, 1.0);
    assert!(oracle_report.no_mistakes);
    assert_eq!(oracle_report.cost_of_wrong, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..1000 {
        let n = rng.gen_range(1..30);
        let k = rng.gen_range(2..6);
        let records: Vec<RuntimeRecord> = (0..n)
            .map(|i| {
                let ts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..900.0)).collect();
                RuntimeRecord::new(format!("r{i}"), ts).unwrap()
            })
            .collect();
        let selections: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let report = evaluate(&selections, &records, 500.0).unwrap();
        let mean_best: f64 = records.iter().map(|r| r.best_time).sum::<f64>() / n as f64;
        assert!(
            report.avg_runtime >= mean_best - 1e-9,
            "selector beat the oracle bound"
        );
    }
    println!("PASS criterion 6: worked metrics exact; oracle bound held on 1000 random tables");
}

/// Criterion 7: the permutation study reproduces the clause-order effect.
#[test]
fn criterion_7_permutation_study_shape() {
    let instances = generate(&SyntheticSpec {
        n_instances: 30,
        min_vars: 12,
        max_vars: 36,
        min_ratio: 2.5,
        max_ratio: 4.0,
        length_weights: [0.1, 0.3, 0.3, 0.2, 0.1],
        seed: 777,
    });
    let ratio = feature_index("clause_var_ratio").unwrap();
    let mk_spec = |alpha: f64| OracleSpec {
        seed: 70,
        profiles: vec![SolverProfile {
            name: "subject".into(),
            base: 1.0,
            weights: vec![(ratio, 0.3)],
            alpha,
            noise_scale: 0.02,
        }],
    };

    // Order-sensitive oracle: clause-shuffle spread dominates.
    let spec = mk_spec(0.5);
    let rows = permute_study(&instances, 20, 4242, &|inst| Ok(oracle_runtimes(inst, &spec)[0]))
        .unwrap();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.clause_samples.len() + r.variable_samples.len() == 40));
    let dominated = rows.iter().filter(|r| r.clause.std > r.variable.std).count();
    assert!(
        dominated as f64 >= 0.8 * rows.len() as f64,
        "clause spread dominated on only {dominated}/30"
    );

    // Order-insensitive oracle: clause-shuffle spread is exactly zero.
    let flat = mk_spec(0.0);
    let rows = permute_study(&instances, 20, 4242, &|inst| Ok(oracle_runtimes(inst, &flat)[0]))
        .unwrap();
    assert!(rows.iter().all(|r| r.clause.std == 0.0));
    println!(
        "PASS criterion 7: clause std > variable std on {dominated}/30 instances with the \
         order term, exactly 0 without it"
    );
}

/// Criterion 8: fixed seeds give byte-identical pipeline outputs, and
/// checkpoints restore forward outputs bit-exactly.
#[test]
fn criterion_8_determinism_and_persistence() {
    let run_pipeline = |root: &std::path::Path| -> (Vec<u8>, Vec<u8>, String, String) {
        let spec = SyntheticSpec {
            n_instances: 80,
            min_vars: 10,
            max_vars: 24,
            min_ratio: 2.5,
            max_ratio: 4.0,
            length_weights: [0.1, 0.4, 0.3, 0.2, 0.0],
            seed: 808,
        };
        let paths = generate_to_dir(&spec, &root.join("cnf")).unwrap();
        let horn = feature_index("horn_frac").unwrap();
        let oracle = OracleSpec {
            seed: 9,
            profiles: vec![
                SolverProfile {
                    name: "a".into(),
                    base: 0.6,
                    weights: vec![(horn, 2.0)],
                    alpha: 0.0,
                    noise_scale: 0.02,
                },
                SolverProfile {
                    name: "b".into(),
                    base: 1.1,
                    weights: vec![(horn, -2.0)],
                    alpha: 0.0,
                    noise_scale: 0.02,
                },
            ],
        };
        let options = LabelOptions { cutoff: 500.0, fold_seed: 3, n_folds: 4, ..Default::default() };
        let (dataset, _) = label(&paths, &LabelMode::Oracle(oracle), &options).unwrap();
        let manifest_path = root.join("manifest.csv");
        save_manifest(&dataset, &manifest_path).unwrap();
        let manifest_bytes = std::fs::read(&manifest_path).unwrap();

        let config = TrainConfig {
            hidden: 8,
            max_epochs: 6,
            seed: 5,
            ..TrainConfig::default()
        };
        let graphs: Vec<LiteralClauseGraph> = dataset
            .paths
            .iter()
            .map(|p| build_graph(&cnf::parse_dimacs_file(p).unwrap(), config.feature_mode))
            .collect();
        let outcome = train_with_graphs(&dataset, &graphs, 0, &config).unwrap();
        let checkpoint = save_checkpoint(&outcome.params);

        let (test_idx, _) = dataset.fold_split(0);
        let selections: Vec<usize> = test_idx
            .iter()
            .map(|&i| forward(&graphs[i], &outcome.params).unwrap().argmax())
            .collect();
        let test_records: Vec<RuntimeRecord> =
            test_idx.iter().map(|&i| dataset.records[i].clone()).collect();
        let report = evaluate(&selections, &test_records, dataset.cutoff).unwrap();
        let selections_csv = selections_to_csv(&test_records, &selections);

        // Round-trip: the loaded checkpoint reproduces forward outputs
        // bit-exactly.
        let restored = load_checkpoint(&checkpoint).unwrap();
        for g in graphs.iter().take(10) {
            let a = forward(g, &outcome.params).unwrap();
            let b = forward(g, &restored).unwrap();
            let identical = a
                .probs()
                .iter()
                .zip(b.probs())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            assert!(identical, "restored checkpoint diverged");
        }
        assert_eq!(save_checkpoint(&restored), checkpoint);

        (manifest_bytes, checkpoint, report.to_csv(), selections_csv)
    };

    // Rerun the whole pipeline in the same workspace; every artifact must
    // come out byte-identical.
    let dir = tempfile::tempdir().unwrap();
    let (m1, c1, r1, s1) = run_pipeline(dir.path());
    let (m2, c2, r2, s2) = run_pipeline(dir.path());
    assert_eq!(m1, m2, "manifests differ between reruns");
    assert_eq!(c1, c2, "checkpoints differ between reruns");
    assert_eq!(r1, r2, "reports differ between reruns");
    assert_eq!(s1, s2, "selections differ between reruns");
    println!("PASS criterion 8: byte-identical reruns; checkpoint round-trip bit-exact");
}

/// Criterion 9: parser round-trip on 1000 generated instances plus the
/// curated malformed-input suite.
#[test]
fn criterion_9_parser_robustness() {
    let instances = generate(&SyntheticSpec {
        n_instances: 1000,
        min_vars: 1,
        max_vars: 60,
        min_ratio: 0.5,
        max_ratio: 5.0,
        length_weights: [0.15, 0.25, 0.25, 0.2, 0.15],
        seed: 909,
    });
    for inst in &instances {
        let text = serialize_dimacs(inst);
        let back = parse_dimacs(text.as_bytes()).unwrap();
        assert_eq!(&back, inst);
        // parse . serialize . parse is the identity.
        assert_eq!(serialize_dimacs(&back), text);
    }

    let cases: Vec<(&[u8], fn(&ParseError) -> bool)> = vec![
        (b"", |e| matches!(e, ParseError::MalformedHeader(_))),
        (b"1 2 0", |e| matches!(e, ParseError::MalformedHeader(_))),
        (b"p dnf 2 1\n1 0", |e| matches!(e, ParseError::MalformedHeader(_))),
        (b"p cnf two 1\n1 0", |e| matches!(e, ParseError::MalformedHeader(_))),
        (b"p cnf 2\n1 0", |e| matches!(e, ParseError::MalformedHeader(_))),
        (b"p cnf 0 0", |e| matches!(e, ParseError::MalformedHeader(_))),
        (b"p cnf 2 1\n3 0", |e| {
            matches!(e, ParseError::LiteralOutOfRange { literal: 3, .. })
        }),
        (b"p cnf 2 1\n-3 0", |e| {
            matches!(e, ParseError::LiteralOutOfRange { literal: -3, .. })
        }),
        (b"p cnf 2 3\n1 0\n2 0", |e| {
            matches!(e, ParseError::ClauseCountMismatch { declared: 3, actual: 2 })
        }),
        (b"p cnf 2 2\n1 0\n0", |e| matches!(e, ParseError::EmptyClause { index: 1 })),
        (b"p cnf 2 1\n0", |e| matches!(e, ParseError::EmptyClause { index: 0 })),
        (b"p cnf 2 1\n1 x 0", |e| matches!(e, ParseError::InvalidToken(_))),
    ];
    for (input, check) in cases {
        let err = parse_dimacs(input).expect_err("malformed input accepted");
        assert!(check(&err), "wrong error class for {:?}: {err}", String::from_utf8_lossy(input));
    }

    // Legacy trailer and missing final zero are accepted.
    assert!(parse_dimacs(b"p cnf 2 2\n1 0\n-2 0\n%\n0\n").is_ok());
    assert!(parse_dimacs(b"p cnf 2 2\n1 0\n-2").is_ok());
    println!("PASS criterion 9: 1000 round-trips identical; malformed suite raises the specified errors");
}
