//! Runtime label collection: the simulated oracle or external solver
//! binaries run under a cutoff, producing a [`LabeledDataset`].
//!
//! External solvers are command templates with an `{instance}` placeholder,
//! e.g. `kissat -q {instance}`. Each (instance, solver) pair runs as one
//! process; wall-clock time comes from a monotonic clock, reported at
//! millisecond precision, and processes still running at the cutoff are
//! killed and recorded as censored. Results land in canonical
//! (instance x solver) order no matter how the parallel runs complete.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cnf::{parse_dimacs_file, CnfInstance, ParseError};
use crate::dataset::{DatasetError, LabeledDataset, RuntimeRecord};
use crate::oracle::{oracle_runtimes, OracleSpec};

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("solver {name}: command template must contain {{instance}}")]
    BadTemplate { name: String },
    #[error("solver {name}: cannot launch {program}: {source}")]
    MissingBinary {
        name: String,
        program: String,
        source: std::io::Error,
    },
    #[error("cutoff must be positive")]
    BadCutoff,
    #[error("no instances to label")]
    NoInstances,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An external solver: display name plus command template.
#[derive(Debug, Clone)]
pub struct SolverCommand {
    pub name: String,
    pub template: String,
}

#[derive(Debug, Clone)]
pub enum LabelMode {
    Oracle(OracleSpec),
    External(Vec<SolverCommand>),
}

#[derive(Debug, Clone)]
pub struct LabelOptions {
    pub cutoff: f64,
    /// Parallel (instance, solver) processes in external mode.
    pub jobs: usize,
    pub fold_seed: u64,
    pub n_folds: usize,
    /// Skip instances with more variables than this.
    pub max_vars: Option<u32>,
}

impl Default for LabelOptions {
    fn default() -> Self {
        Self { cutoff: 500.0, jobs: 1, fold_seed: 0, n_folds: 5, max_vars: None }
    }
}

/// Outcome flag per (instance, solver) run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunFlag {
    Ok,
    /// Killed at the cutoff; runtime recorded as the cutoff.
    Timeout,
    /// Exited abnormally; runtime recorded as the cutoff.
    Crash,
}

impl RunFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RunFlag::Ok => "ok",
            RunFlag::Timeout => "timeout",
            RunFlag::Crash => "crash",
        }
    }
}

/// Anomaly rows (`instance_id,solver,flag`) for everything that did not
/// finish normally.
pub fn flags_to_csv(
    records: &[RuntimeRecord],
    solver_names: &[String],
    flags: &[Vec<RunFlag>],
) -> String {
    let mut out = String::from("instance_id,solver,flag\n");
    for (record, row) in records.iter().zip(flags) {
        for (k, &flag) in row.iter().enumerate() {
            if flag != RunFlag::Ok {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    record.instance_id,
                    solver_names[k],
                    flag.as_str()
                );
            }
        }
    }
    out
}

/// Labels instance files, returning the dataset plus per-run flags
/// (parallel to `dataset.records`).
pub fn label(
    paths: &[PathBuf],
    mode: &LabelMode,
    options: &LabelOptions,
) -> Result<(LabeledDataset, Vec<Vec<RunFlag>>), LabelError> {
    if options.cutoff <= 0.0 {
        return Err(LabelError::BadCutoff);
    }
    let mut kept: Vec<(PathBuf, CnfInstance)> = Vec::with_capacity(paths.len());
    for path in paths {
        let inst = parse_dimacs_file(path)?;
        if let Some(cap) = options.max_vars {
            if inst.num_vars() > cap {
                log::warn!(
                    "skipping {} ({} variables over the {cap} cap)",
                    path.display(),
                    inst.num_vars()
                );
                continue;
            }
        }
        kept.push((path.clone(), inst));
    }
    if kept.is_empty() {
        return Err(LabelError::NoInstances);
    }

    let (solver_names, raw): (Vec<String>, Vec<Vec<(f64, RunFlag)>>) = match mode {
        LabelMode::Oracle(spec) => {
            let names = spec.solver_names();
            let rows = kept
                .iter()
                .map(|(_, inst)| {
                    oracle_runtimes(inst, spec)
                        .into_iter()
                        .map(|t| {
                            if t >= options.cutoff {
                                (options.cutoff, RunFlag::Timeout)
                            } else {
                                (t, RunFlag::Ok)
                            }
                        })
                        .collect()
                })
                .collect();
            (names, rows)
        }
        LabelMode::External(commands) => {
            for cmd in commands {
                if !cmd.template.contains("{instance}") {
                    return Err(LabelError::BadTemplate { name: cmd.name.clone() });
                }
            }
            let names = commands.iter().map(|c| c.name.clone()).collect();
            let paths_only: Vec<&Path> = kept.iter().map(|(p, _)| p.as_path()).collect();
            let rows = run_external(&paths_only, commands, options)?;
            (names, rows)
        }
    };

    let mut records = Vec::with_capacity(kept.len());
    let mut flags = Vec::with_capacity(kept.len());
    let mut out_paths = Vec::with_capacity(kept.len());
    for ((path, inst), row) in kept.into_iter().zip(raw) {
        let runtimes: Vec<f64> = row.iter().map(|&(t, _)| t).collect();
        flags.push(row.into_iter().map(|(_, f)| f).collect());
        records.push(RuntimeRecord::new(inst.source_id().to_string(), runtimes)?);
        out_paths.push(path);
    }
    let dataset = LabeledDataset::new(
        records,
        out_paths,
        options.cutoff,
        solver_names,
        options.fold_seed,
        options.n_folds,
    );
    Ok((dataset, flags))
}

/// Runs one command with a kill-after-cutoff contract; returns wall seconds
/// at millisecond precision.
pub fn run_with_cutoff(
    name: &str,
    template: &str,
    instance: &Path,
    cutoff: f64,
) -> Result<(f64, RunFlag), LabelError> {
    let filled = template.replace("{instance}", &instance.display().to_string());
    let mut parts = filled.split_whitespace();
    let program = parts.next().ok_or_else(|| LabelError::BadTemplate {
        name: name.to_string(),
    })?;
    let mut command = Command::new(program);
    command.args(parts).stdout(Stdio::null()).stderr(Stdio::null());

    let start = Instant::now();
    let mut child = command.spawn().map_err(|source| LabelError::MissingBinary {
        name: name.to_string(),
        program: program.to_string(),
        source,
    })?;
    loop {
        match child.try_wait()? {
            Some(status) => {
                let elapsed = start.elapsed().as_secs_f64();
                let seconds = round_ms(elapsed.min(cutoff)).max(0.001);
                let flag = if status.success() { RunFlag::Ok } else { RunFlag::Crash };
                return Ok(match flag {
                    RunFlag::Ok => (seconds, RunFlag::Ok),
                    _ => (cutoff, RunFlag::Crash),
                });
            }
            None => {
                if start.elapsed().as_secs_f64() >= cutoff {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Ok((cutoff, RunFlag::Timeout));
                }
                std::thread::sleep(Duration::from_millis(2));
            }
        }
    }
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

fn run_external(
    paths: &[&Path],
    commands: &[SolverCommand],
    options: &LabelOptions,
) -> Result<Vec<Vec<(f64, RunFlag)>>, LabelError> {
    let k = commands.len();
    let tasks: Vec<(usize, usize)> = (0..paths.len())
        .flat_map(|i| (0..k).map(move |s| (i, s)))
        .collect();
    let results: Mutex<Vec<Option<Result<(f64, RunFlag), LabelError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);
    let workers = options.jobs.max(1).min(tasks.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let t = cursor.fetch_add(1, Ordering::Relaxed);
                if t >= tasks.len() {
                    break;
                }
                let (i, s) = tasks[t];
                let outcome = run_with_cutoff(
                    &commands[s].name,
                    &commands[s].template,
                    paths[i],
                    options.cutoff,
                );
                results.lock().unwrap()[t] = Some(outcome);
            });
        }
    });

    let collected = results.into_inner().unwrap();
    let mut rows = vec![vec![(0.0, RunFlag::Ok); k]; paths.len()];
    for (t, outcome) in collected.into_iter().enumerate() {
        let (i, s) = tasks[t];
        rows[i][s] = outcome.expect("every task ran")?;
    }
    Ok(rows)
}
