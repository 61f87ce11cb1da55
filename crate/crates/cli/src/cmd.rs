//! Subcommand implementations.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Subcommand};

use grass_core::baselines::{best_base_solver, KnnSelector, RidgeSelector, DEFAULT_KNN_K};
use grass_core::cnf::parse_dimacs_file;
use grass_core::config::KvConfig;
use grass_core::dataset::{load_manifest, save_manifest, RuntimeRecord};
use grass_core::eval::{evaluate, selections_to_csv};
use grass_core::features::global_features;
use grass_core::graph::{build_graph, export_graph_file};
use grass_core::nn::{load_checkpoint_file, save_checkpoint_file};
use grass_core::oracle::{oracle_runtimes, OracleSpec};
use grass_core::runner::{flags_to_csv, label, LabelMode, LabelOptions, RunFlag};
use grass_core::study::{permute_study, study_summary, study_to_csv};
use grass_core::synth::{generate_to_dir, SyntheticSpec};
use grass_core::train::{featurize_dataset, select_solver, train_with_graphs, TrainConfig};

use crate::opts::{collect_instances, feature_mode, parse_solver_flags, usage, Layer};

#[derive(Subcommand)]
pub enum Command {
    /// Generate random CNF instances as DIMACS files.
    Generate(GenerateArgs),
    /// Run solvers (or the simulated oracle) over instances and write a
    /// runtime manifest.
    Label(LabelArgs),
    /// Write literal-clause graph exports, one file per instance.
    Featurize(FeaturizeArgs),
    /// Train the graph-network selector on a manifest.
    Train(TrainArgs),
    /// Pick a solver for one instance, or for a manifest fold.
    Select(SelectArgs),
    /// Score a selections file against a manifest.
    Evaluate(EvaluateArgs),
    /// Shuffle clauses/variables repeatedly and record runtime spread.
    #[command(name = "permute-study")]
    PermuteStudy(StudyArgs),
    /// Fit and score the feature-vector baselines on a manifest fold.
    Baseline(BaselineArgs),
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Label(args) => run_label(args),
        Command::Featurize(args) => featurize(args),
        Command::Train(args) => train(args),
        Command::Select(args) => select(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::PermuteStudy(args) => study(args),
        Command::Baseline(args) => baseline(args),
    }
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Output directory for the .cnf files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    min_vars: Option<u32>,
    #[arg(long)]
    max_vars: Option<u32>,
    #[arg(long)]
    min_ratio: Option<f64>,
    #[arg(long)]
    max_ratio: Option<f64>,
    /// Comma-separated weights for clause lengths 1..5.
    #[arg(long)]
    length_weights: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_weights(raw: &str) -> Result<[f64; 5]> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--length-weights {raw:?}: expected 5 numbers")))?;
    let arr: [f64; 5] = values
        .try_into()
        .map_err(|_| usage(format!("--length-weights {raw:?}: expected 5 numbers")))?;
    Ok(arr)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let layer = Layer::load(args.config.as_deref())?;
    let weights = match layer.get(args.length_weights, "length_weights", String::new())? {
        w if w.is_empty() => [0.05, 0.25, 0.4, 0.2, 0.1],
        w => parse_weights(&w)?,
    };
    let spec = SyntheticSpec {
        n_instances: layer.get(args.count, "count", 100)?,
        min_vars: layer.get(args.min_vars, "min_vars", 10)?,
        max_vars: layer.get(args.max_vars, "max_vars", 40)?,
        min_ratio: layer.get(args.min_ratio, "min_ratio", 2.0)?,
        max_ratio: layer.get(args.max_ratio, "max_ratio", 4.5)?,
        length_weights: weights,
        seed: layer.get(args.seed, "seed", 0)?,
    };
    spec.validate().map_err(usage)?;
    let paths = generate_to_dir(&spec, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} instances under {}", paths.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct LabelArgs {
    /// Instance files or directories of .cnf files.
    #[arg(long, required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Output manifest CSV (a .cfg sidecar is written next to it).
    #[arg(long)]
    out: PathBuf,
    /// Oracle profile config; mutually exclusive with --solver.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// External solver as name=command with an {instance} placeholder.
    /// Repeatable.
    #[arg(long)]
    solver: Vec<String>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    fold_seed: Option<u64>,
    /// Skip instances with more variables than this.
    #[arg(long)]
    max_vars: Option<u32>,
    /// Master seed: default for fold_seed and the oracle seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run_label(args: LabelArgs) -> Result<()> {
    let layer = Layer::load(args.config.as_deref())?;
    let seed = layer.get(args.seed, "seed", 0)?;
    let mode = match (&args.oracle, args.solver.is_empty()) {
        (Some(path), true) => {
            let cfg = KvConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
            let mut spec = OracleSpec::from_config(&cfg)?;
            if args.seed.is_some() {
                spec.seed = seed;
            }
            LabelMode::Oracle(spec)
        }
        (None, false) => LabelMode::External(parse_solver_flags(&args.solver)?),
        (Some(_), false) => return Err(usage("--oracle and --solver are mutually exclusive")),
        (None, true) => return Err(usage("either --oracle or --solver is required")),
    };
    let options = LabelOptions {
        cutoff: layer.get(args.cutoff, "cutoff", 500.0)?,
        jobs: layer.get(args.jobs, "jobs", 1)?,
        fold_seed: layer.get(args.fold_seed, "fold_seed", seed)?,
        n_folds: layer.get(args.folds, "folds", 5)?,
        max_vars: args.max_vars,
    };
    let paths = collect_instances(&args.instances)?;
    let (dataset, flags) = label(&paths, &mode, &options)?;
    save_manifest(&dataset, &args.out)?;
    let anomalies = flags.iter().flatten().filter(|&&f| f != RunFlag::Ok).count();
    if anomalies > 0 {
        let flags_path = args.out.with_extension("flags.csv");
        std::fs::write(&flags_path, flags_to_csv(&dataset.records, &dataset.solver_names, &flags))?;
        println!(
            "labeled {} instances x {} solvers ({anomalies} anomalies, see {})",
            dataset.len(),
            dataset.num_solvers(),
            flags_path.display()
        );
    } else {
        println!(
            "labeled {} instances x {} solvers",
            dataset.len(),
            dataset.num_solvers()
        );
    }
    Ok(())
}

#[derive(Args)]
pub struct FeaturizeArgs {
    #[arg(long, required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    /// Output directory; one `<stem>.graph` per instance.
    #[arg(long)]
    out: PathBuf,
    /// custom+pe | custom | random | node-type
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    feature_seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn featurize(args: FeaturizeArgs) -> Result<()> {
    let layer = Layer::load(args.config.as_deref())?;
    let mode = feature_mode(&layer, args.mode, args.feature_seed)?;
    std::fs::create_dir_all(&args.out)?;
    let paths = collect_instances(&args.instances)?;
    for path in &paths {
        let inst = parse_dimacs_file(path)?;
        let graph = build_graph(&inst, mode);
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        export_graph_file(&graph, &args.out.join(format!("{stem}.graph")))?;
    }
    println!("featurized {} instances into {}", paths.len(), args.out.display());
    Ok(())
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Held-out test fold; training uses the remaining folds.
    #[arg(long)]
    fold: usize,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch loss log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long)]
    feature_mode: Option<String>,
    #[arg(long)]
    feature_seed: Option<u64>,
    /// Share one convolution matrix across relations (ablation).
    #[arg(long)]
    homogeneous: bool,
    /// Train on ln(1+t) instead of raw seconds.
    #[arg(long)]
    log_runtime: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn train_config(layer: &Layer, args: &TrainArgs) -> Result<TrainConfig> {
    let defaults = TrainConfig::default();
    Ok(TrainConfig {
        learning_rate: layer.get(args.learning_rate, "learning_rate", defaults.learning_rate)?,
        max_epochs: layer.get(args.max_epochs, "max_epochs", defaults.max_epochs)?,
        batch_size: layer.get(args.batch_size, "batch_size", defaults.batch_size)?,
        patience: layer.get(args.patience, "patience", defaults.patience)?,
        val_fraction: layer.get(args.val_fraction, "val_fraction", defaults.val_fraction)?,
        seed: layer.get(args.seed, "seed", defaults.seed)?,
        hidden: layer.get(args.hidden, "hidden", defaults.hidden)?,
        layers: layer.get(args.layers, "layers", defaults.layers)?,
        feature_mode: feature_mode(layer, args.feature_mode.clone(), args.feature_seed)?,
        homogeneous: layer.get_bool(args.homogeneous, "homogeneous")?,
        log_runtime: layer.get_bool(args.log_runtime, "log_runtime")?,
    })
}

fn train(args: TrainArgs) -> Result<()> {
    let layer = Layer::load(args.config.as_deref())?;
    let config = train_config(&layer, &args)?;
    let dataset = load_manifest(&args.manifest)?;
    if args.fold >= dataset.n_folds {
        return Err(usage(format!(
            "--fold {} out of range for {} folds",
            args.fold, dataset.n_folds
        )));
    }
    let graphs = featurize_dataset(&dataset, config.feature_mode)?;
    let outcome = train_with_graphs(&dataset, &graphs, args.fold, &config)?;
    save_checkpoint_file(&outcome.params, &args.out)?;
    if let Some(log_path) = &args.log {
        outcome.log.save(log_path)?;
    }
    println!(
        "trained {} epochs; best validation loss {:.6} at epoch {}; checkpoint {}",
        outcome.log.epochs.len(),
        outcome.best_val_loss,
        outcome.best_epoch,
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
pub struct SelectArgs {
    /// Checkpoint produced by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Single instance to pick a solver for.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Manifest for batch selection.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Restrict batch selection to this fold (default: every record).
    #[arg(long)]
    fold: Option<usize>,
    /// Selections CSV output (batch mode).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver names, comma separated (single-instance display).
    #[arg(long)]
    solvers: Option<String>,
}

fn select(args: SelectArgs) -> Result<()> {
    let params = load_checkpoint_file(&args.model)?;
    match (&args.instance, &args.manifest) {
        (Some(path), None) => {
            let inst = parse_dimacs_file(path)?;
            let chosen = select_solver(&inst, &params)?;
            let name = args
                .solvers
                .as_deref()
                .and_then(|s| s.split(',').nth(chosen).map(|n| n.trim().to_string()))
                .unwrap_or_else(|| format!("solver_{chosen}"));
            println!("{chosen} {name}");
            Ok(())
        }
        (None, Some(manifest_path)) => {
            let dataset = load_manifest(manifest_path)?;
            let indices: Vec<usize> = match args.fold {
                Some(f) if f >= dataset.n_folds => {
                    return Err(usage(format!(
                        "--fold {f} out of range for {} folds",
                        dataset.n_folds
                    )))
                }
                Some(f) => dataset.fold_split(f).0,
                None => (0..dataset.len()).collect(),
            };
            let mut records: Vec<RuntimeRecord> = Vec::with_capacity(indices.len());
            let mut selections = Vec::with_capacity(indices.len());
            for &i in &indices {
                let inst = parse_dimacs_file(&dataset.paths[i])?;
                selections.push(select_solver(&inst, &params)?);
                records.push(dataset.records[i].clone());
            }
            let csv = selections_to_csv(&records, &selections);
            match &args.out {
                Some(out) => {
                    std::fs::write(out, csv)?;
                    println!("wrote {} selections to {}", selections.len(), out.display());
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
        _ => Err(usage("exactly one of --instance or --manifest is required")),
    }
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Selections CSV with header instance_id,selected[,...].
    #[arg(long)]
    selections: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    cutoff: Option<f64>,
    /// Report CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enriched per-instance CSV output.
    #[arg(long)]
    per_instance: Option<PathBuf>,
}

fn read_selections(path: &PathBuf) -> Result<Vec<(String, usize)>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() < 2 {
            anyhow::bail!("selections row needs at least instance_id,selected");
        }
        let selected: usize = row[1]
            .parse()
            .with_context(|| format!("bad selection {:?} for {}", &row[1], &row[0]))?;
        out.push((row[0].to_string(), selected));
    }
    Ok(out)
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let dataset = load_manifest(&args.manifest)?;
    let cutoff = args.cutoff.unwrap_or(dataset.cutoff);
    let rows = read_selections(&args.selections)?;
    let mut records = Vec::with_capacity(rows.len());
    let mut selections = Vec::with_capacity(rows.len());
    for (id, selected) in rows {
        let record = dataset
            .records
            .iter()
            .find(|r| r.instance_id == id)
            .ok_or_else(|| anyhow::anyhow!("selection for unknown instance {id:?}"))?;
        records.push(record.clone());
        selections.push(selected);
    }
    let report = evaluate(&selections, &records, cutoff)?;
    print!("{}", report.to_table("selections"));
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_csv())?;
    }
    if let Some(out) = &args.per_instance {
        std::fs::write(out, selections_to_csv(&records, &selections))?;
    }
    Ok(())
}

#[derive(Args)]
pub struct StudyArgs {
    #[arg(long, required = true, num_args = 1..)]
    instances: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Number of instances to sample.
    #[arg(long, default_value_t = grass_core::study::DEFAULT_STUDY_INSTANCES)]
    m: usize,
    /// Shuffles of each kind per instance.
    #[arg(long, default_value_t = grass_core::study::DEFAULT_STUDY_SHUFFLES)]
    t: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Oracle profile config.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Index of the oracle profile to time.
    #[arg(long, default_value_t = 0)]
    solver_index: usize,
    /// External solver as name=command (alternative to --oracle).
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn study(args: StudyArgs) -> Result<()> {
    let layer = Layer::load(args.config.as_deref())?;
    let seed = layer.get(args.seed, "seed", 0)?;
    let cutoff = layer.get(args.cutoff, "cutoff", 500.0)?;
    let paths = collect_instances(&args.instances)?;
    let mut instances = Vec::new();
    for path in paths.iter().take(args.m) {
        instances.push(parse_dimacs_file(path)?);
    }
    if instances.len() < args.m {
        log::warn!("only {} instances available for m={}", instances.len(), args.m);
    }

    let rows = match (&args.oracle, &args.solver) {
        (Some(oracle_path), None) => {
            let cfg = KvConfig::load(oracle_path)?;
            let spec = OracleSpec::from_config(&cfg)?;
            if args.solver_index >= spec.profiles.len() {
                return Err(usage(format!(
                    "--solver-index {} out of range for {} profiles",
                    args.solver_index,
                    spec.profiles.len()
                )));
            }
            let k = args.solver_index;
            permute_study(&instances, args.t, seed, &move |inst| {
                Ok(oracle_runtimes(inst, &spec)[k].min(cutoff))
            })?
        }
        (None, Some(solver)) => {
            let commands = parse_solver_flags(std::slice::from_ref(solver))?;
            let cmd = commands.into_iter().next().unwrap();
            let dir = tempdir_for_study()?;
            let mut counter = 0usize;
            let measure = move |inst: &grass_core::cnf::CnfInstance| {
                counter += 1;
                let path = dir.join(format!("shuffle-{counter}.cnf"));
                std::fs::write(&path, grass_core::cnf::serialize_dimacs(inst))?;
                let (t, _) = grass_core::runner::run_with_cutoff(&cmd.name, &cmd.template, &path, cutoff)?;
                let _ = std::fs::remove_file(&path);
                Ok(t)
            };
            // Interior mutability for the shared counter.
            let cell = std::cell::RefCell::new(measure);
            permute_study(&instances, args.t, seed, &move |inst| (cell.borrow_mut())(inst))?
        }
        _ => return Err(usage("exactly one of --oracle or --solver is required")),
    };

    std::fs::write(&args.out, study_to_csv(&rows, args.t))?;
    print!("{}", study_summary(&rows));
    println!("wrote {}", args.out.display());
    Ok(())
}

fn tempdir_for_study() -> Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!("grass-study-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

#[derive(Args)]
pub struct BaselineArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Held-out test fold.
    #[arg(long)]
    fold: usize,
    /// ridge | knn | best | oracle | all
    #[arg(long, default_value = "all")]
    method: String,
    /// Directory for per-method report and selection CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Ridge regularization strength.
    #[arg(long)]
    lambda: Option<f64>,
    /// Neighbor count for knn.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let layer = Layer::load(args.config.as_deref())?;
    let lambda = layer.get(args.lambda, "lambda", 1.0)?;
    let knn_k = layer.get(args.k, "knn_k", DEFAULT_KNN_K)?;
    let dataset = load_manifest(&args.manifest)?;
    if args.fold >= dataset.n_folds {
        return Err(usage(format!(
            "--fold {} out of range for {} folds",
            args.fold, dataset.n_folds
        )));
    }
    let methods: Vec<&str> = match args.method.as_str() {
        "all" => vec!["ridge", "knn", "best", "oracle"],
        m @ ("ridge" | "knn" | "best" | "oracle") => vec![m],
        other => return Err(usage(format!("unknown method {other:?}"))),
    };

    let feats: Vec<Vec<f64>> = dataset
        .paths
        .iter()
        .map(|p| Ok(global_features(&parse_dimacs_file(p)?).to_vec()))
        .collect::<Result<_>>()?;
    let (test_idx, train_idx) = dataset.fold_split(args.fold);
    anyhow::ensure!(!test_idx.is_empty(), "fold {} is empty", args.fold);
    let train_feats: Vec<Vec<f64>> = train_idx.iter().map(|&i| feats[i].clone()).collect();
    let train_recs: Vec<RuntimeRecord> =
        train_idx.iter().map(|&i| dataset.records[i].clone()).collect();
    let test_recs: Vec<RuntimeRecord> =
        test_idx.iter().map(|&i| dataset.records[i].clone()).collect();

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    for method in methods {
        let selections: Vec<usize> = match method {
            "ridge" => {
                let model = RidgeSelector::fit(&train_feats, &train_recs, lambda);
                test_idx.iter().map(|&i| model.select(&feats[i])).collect()
            }
            "knn" => {
                let model = KnnSelector::fit(&train_feats, &train_recs, knn_k);
                test_idx.iter().map(|&i| model.select(&feats[i])).collect()
            }
            "best" => {
                let solver = best_base_solver(&train_recs);
                vec![solver; test_idx.len()]
            }
            "oracle" => test_recs.iter().map(|r| r.best_solver).collect(),
            _ => unreachable!(),
        };
        let report = evaluate(&selections, &test_recs, dataset.cutoff)?;
        print!("{}", report.to_table(method));
        println!();
        if let Some(dir) = &args.out_dir {
            std::fs::write(dir.join(format!("{method}.report.csv")), report.to_csv())?;
            std::fs::write(
                dir.join(format!("{method}.selections.csv")),
                selections_to_csv(&test_recs, &selections),
            )?;
        }
    }
    Ok(())
}
