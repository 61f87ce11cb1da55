//! Heterogeneous graph network over literal-clause graphs.
//!
//! Three node types (clause, positive literal, negative literal) and six
//! directed relations between them, each with its own convolution weights.
//! A learned per-type input projection lifts the raw 17/3/3-dimensional
//! node features to a common hidden width; degree-normalized convolutions
//! then update the embeddings, per-type mean pooling and a linear head
//! produce a distribution over solvers.
//!
//! Parameters are kept f32-representable (checkpoints store 32-bit floats
//! bit-exactly); all arithmetic runs in f64 so that analytic gradients can
//! be validated against finite differences at tight tolerances.

mod model;
mod params;

pub use model::{
    backward, embed, forward, forward_with_tape, hetero_conv_layer, readout, ForwardTape,
    Gradients, GrassModel, NodeEmbeddings, SolverDistribution,
};
pub use params::{
    load_checkpoint, load_checkpoint_file, save_checkpoint, save_checkpoint_file, ModelConfig,
    ModelParameters, Relation, RELATIONS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("graph has no {0} nodes")]
    EmptyGraph(&'static str),
    #[error("backward called without a stored forward pass")]
    StaleTape,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
