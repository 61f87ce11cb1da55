//! Runtime-aware SAT solver selection.
//!
//! Given a fixed portfolio of SAT solvers and a CNF instance, pick the solver
//! expected to finish fastest. Instances are parsed from DIMACS, turned into
//! attributed literal-clause graphs, and scored by a small heterogeneous graph
//! network trained under a regret loss on measured (or simulated) runtimes.
//! Feature-vector baselines (ridge runtime regression, k-NN classification)
//! and an evaluation-metric suite are included for benchmarking.

pub mod baselines;
pub mod cnf;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod graph;
pub mod loss;
pub mod nn;
pub mod optim;
pub mod oracle;
pub mod runner;
pub mod study;
pub mod synth;
pub mod train;
pub mod util;

pub use cnf::{CnfInstance, ParseError, PermutationKind, PermutationSpec};
pub use dataset::{LabeledDataset, RuntimeRecord};
pub use eval::EvaluationReport;
pub use graph::{FeatureMode, LiteralClauseGraph};
pub use nn::ModelParameters;
pub use train::TrainConfig;
