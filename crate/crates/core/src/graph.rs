//! Attributed literal-clause graphs.
//!
//! A CNF instance becomes a tripartite graph with one node per clause and
//! two nodes per variable (positive and negative literal). Edges connect a
//! literal node to every clause it occurs in (one edge per occurrence) and
//! each positive literal to its negation. Nodes carry fixed-width feature
//! vectors: 17 values per clause (7 structural + a 10-dimensional sinusoidal
//! encoding of the clause position) and 3 per literal node.
//!
//! Features are computed in double precision and stored in single precision.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cnf::CnfInstance;
use crate::util::{mix64, Fnv1a};

/// Clause feature width: 7 structural values + [`PE_DIM`] positional values.
pub const CLAUSE_FEATURES: usize = 17;
/// Literal-node feature width.
pub const LITERAL_FEATURES: usize = 3;
/// Positional-encoding width.
pub const PE_DIM: usize = 10;

/// Bumped whenever the feature definitions change; folded into
/// [`feature_schema_hash`] so stale checkpoints are rejected.
pub const FEATURIZER_VERSION: u32 = 1;

/// Node feature variants. `CustomPlusPe` is the default; the others exist
/// for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Structural features plus clause positional encodings.
    CustomPlusPe,
    /// Structural features with the positional dimensions zeroed.
    CustomNoPe,
    /// Seeded standard-normal features of the same dimensions, keyed by
    /// node index. Deterministic, but not relabeling-invariant.
    Random { seed: u64 },
    /// One-hot node-type indicator in the first three dimensions.
    NodeTypeOneHot,
}

impl Default for FeatureMode {
    fn default() -> Self {
        FeatureMode::CustomPlusPe
    }
}

impl FeatureMode {
    pub fn tag(&self) -> &'static str {
        match self {
            FeatureMode::CustomPlusPe => "custom+pe",
            FeatureMode::CustomNoPe => "custom",
            FeatureMode::Random { .. } => "random",
            FeatureMode::NodeTypeOneHot => "node-type",
        }
    }

    /// Parses the CLI spelling; `seed` is only used by `random`.
    pub fn from_tag(tag: &str, seed: u64) -> Option<Self> {
        match tag {
            "custom+pe" => Some(FeatureMode::CustomPlusPe),
            "custom" => Some(FeatureMode::CustomNoPe),
            "random" => Some(FeatureMode::Random { seed }),
            "node-type" => Some(FeatureMode::NodeTypeOneHot),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            FeatureMode::Random { seed } => *seed,
            _ => 0,
        }
    }
}

/// Stable identifier of the featurizer output: version, dimensions and mode.
/// Stored in checkpoints; a mismatch at inference time means the model was
/// trained against a different feature definition.
pub fn feature_schema_hash(mode: FeatureMode) -> u64 {
    let mut h = Fnv1a::new();
    h.write(b"lcg-features");
    h.write_u64(FEATURIZER_VERSION as u64);
    h.write_u64(CLAUSE_FEATURES as u64);
    h.write_u64(LITERAL_FEATURES as u64);
    h.write(mode.tag().as_bytes());
    h.write_u64(mode.seed());
    h.finish()
}

/// The three node classes of the tripartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeType {
    Clause,
    PosLit,
    NegLit,
}

/// Attributed tripartite graph for one CNF instance. Immutable once built.
#[derive(Debug, Clone)]
pub struct LiteralClauseGraph {
    n_clauses: usize,
    n_vars: usize,
    /// One `(variable index 0-based, clause index)` pair per occurrence of a
    /// positive literal, in file order.
    edges_pos_clause: Vec<(u32, u32)>,
    /// Same for negative literals.
    edges_neg_clause: Vec<(u32, u32)>,
    /// Row-major `[n_clauses x CLAUSE_FEATURES]`.
    clause_features: Vec<f32>,
    /// Row-major `[n_vars x LITERAL_FEATURES]`.
    pos_lit_features: Vec<f32>,
    neg_lit_features: Vec<f32>,
    /// Per-relation degrees (unclamped occurrence counts).
    clause_pos_degree: Vec<u32>,
    clause_neg_degree: Vec<u32>,
    pos_clause_degree: Vec<u32>,
    neg_clause_degree: Vec<u32>,
}

impl LiteralClauseGraph {
    pub fn n_clauses(&self) -> usize {
        self.n_clauses
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Total node count: one per clause plus two per variable.
    pub fn n_nodes(&self) -> usize {
        self.n_clauses + 2 * self.n_vars
    }

    pub fn edges_pos_clause(&self) -> &[(u32, u32)] {
        &self.edges_pos_clause
    }

    pub fn edges_neg_clause(&self) -> &[(u32, u32)] {
        &self.edges_neg_clause
    }

    /// Literal-clause edges as `(literal node index, clause index)`, one per
    /// occurrence, using the dense literal-node indexing.
    pub fn edges_lit_clause(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let pos = self
            .edges_pos_clause
            .iter()
            .map(|&(v, c)| (2 * v as usize, c as usize));
        let neg = self
            .edges_neg_clause
            .iter()
            .map(|&(v, c)| (2 * v as usize + 1, c as usize));
        pos.chain(neg)
    }

    pub fn n_lit_clause_edges(&self) -> usize {
        self.edges_pos_clause.len() + self.edges_neg_clause.len()
    }

    /// One implicit pairing edge per variable.
    pub fn n_pos_neg_edges(&self) -> usize {
        self.n_vars
    }

    pub fn clause_feature_row(&self, clause: usize) -> &[f32] {
        &self.clause_features[clause * CLAUSE_FEATURES..(clause + 1) * CLAUSE_FEATURES]
    }

    pub fn pos_lit_feature_row(&self, var: usize) -> &[f32] {
        &self.pos_lit_features[var * LITERAL_FEATURES..(var + 1) * LITERAL_FEATURES]
    }

    pub fn neg_lit_feature_row(&self, var: usize) -> &[f32] {
        &self.neg_lit_features[var * LITERAL_FEATURES..(var + 1) * LITERAL_FEATURES]
    }

    pub fn clause_features(&self) -> &[f32] {
        &self.clause_features
    }

    pub fn pos_lit_features(&self) -> &[f32] {
        &self.pos_lit_features
    }

    pub fn neg_lit_features(&self) -> &[f32] {
        &self.neg_lit_features
    }

    /// Degree of clause `c` under the positive-literal relation.
    pub fn clause_pos_degree(&self, c: usize) -> u32 {
        self.clause_pos_degree[c]
    }

    pub fn clause_neg_degree(&self, c: usize) -> u32 {
        self.clause_neg_degree[c]
    }

    /// Number of clauses the positive literal of variable `v` occurs in
    /// (occurrences, duplicates counted).
    pub fn pos_clause_degree(&self, v: usize) -> u32 {
        self.pos_clause_degree[v]
    }

    pub fn neg_clause_degree(&self, v: usize) -> u32 {
        self.neg_clause_degree[v]
    }
}

/// Sinusoidal encoding of a 0-based clause position: entry `2i` is
/// `sin(k / 10000^(2i/10))`, entry `2i+1` the matching cosine, `i = 0..4`.
/// All entries lie in `[-1, 1]`.
pub fn positional_encoding(k: usize) -> [f64; PE_DIM] {
    let mut out = [0.0; PE_DIM];
    for i in 0..PE_DIM / 2 {
        let angle = k as f64 / 10000f64.powf(2.0 * i as f64 / PE_DIM as f64);
        out[2 * i] = angle.sin();
        out[2 * i + 1] = angle.cos();
    }
    out
}

/// A Horn clause has at most one positive literal.
fn is_horn(clause: &[i32]) -> bool {
    clause.iter().filter(|&&l| l > 0).count() <= 1
}

/// Per-occurrence counts for every literal polarity of every variable.
struct OccurrenceCounts {
    pos: Vec<u32>,
    neg: Vec<u32>,
    pos_horn: Vec<u32>,
    neg_horn: Vec<u32>,
}

fn count_occurrences(inst: &CnfInstance) -> OccurrenceCounts {
    let n = inst.num_vars() as usize;
    let mut counts = OccurrenceCounts {
        pos: vec![0; n],
        neg: vec![0; n],
        pos_horn: vec![0; n],
        neg_horn: vec![0; n],
    };
    for clause in inst.clauses() {
        let horn = is_horn(clause);
        for &lit in clause {
            let v = (lit.unsigned_abs() - 1) as usize;
            if lit > 0 {
                counts.pos[v] += 1;
                if horn {
                    counts.pos_horn[v] += 1;
                }
            } else {
                counts.neg[v] += 1;
                if horn {
                    counts.neg_horn[v] += 1;
                }
            }
        }
    }
    counts
}

/// Literal-node features `[degree, horn share, polarity ratio]` for one
/// variable and sign. Degrees and Horn shares are occurrence counts divided
/// by the clause count; the ratio is this polarity's occurrence count over
/// the opposite polarity's plus one.
pub fn literal_features(inst: &CnfInstance, var: u32, positive: bool) -> [f64; LITERAL_FEATURES] {
    assert!(var >= 1 && var <= inst.num_vars(), "variable out of range");
    let counts = count_occurrences(inst);
    let v = (var - 1) as usize;
    literal_features_from_counts(&counts, v, positive, inst.num_clauses())
}

fn literal_features_from_counts(
    counts: &OccurrenceCounts,
    v: usize,
    positive: bool,
    m: usize,
) -> [f64; LITERAL_FEATURES] {
    let m = m as f64;
    let (own, own_horn, other) = if positive {
        (counts.pos[v], counts.pos_horn[v], counts.neg[v])
    } else {
        (counts.neg[v], counts.neg_horn[v], counts.pos[v])
    };
    [
        own as f64 / m,
        own_horn as f64 / m,
        own as f64 / (other as f64 + 1.0),
    ]
}

/// Clause-node features:
/// `[is_horn, length/num_vars, is_binary, is_ternary, positive fraction,
///   negative fraction, positives/(negatives+1), PE(clause_idx)...]`.
pub fn clause_features(inst: &CnfInstance, clause_idx: usize) -> [f64; CLAUSE_FEATURES] {
    assert!(clause_idx < inst.num_clauses(), "clause index out of range");
    let clause = &inst.clauses()[clause_idx];
    let len = clause.len() as f64;
    let pos = clause.iter().filter(|&&l| l > 0).count() as f64;
    let neg = len - pos;
    let mut out = [0.0; CLAUSE_FEATURES];
    out[0] = if pos <= 1.0 { 1.0 } else { 0.0 };
    out[1] = len / inst.num_vars() as f64;
    out[2] = if clause.len() == 2 { 1.0 } else { 0.0 };
    out[3] = if clause.len() == 3 { 1.0 } else { 0.0 };
    out[4] = pos / len;
    out[5] = neg / len;
    out[6] = pos / (neg + 1.0);
    out[7..].copy_from_slice(&positional_encoding(clause_idx));
    out
}

fn random_row(seed: u64, node_tag: u64, node_idx: usize, width: usize, out: &mut [f32]) {
    let mut rng =
        ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(node_tag) ^ mix64(node_idx as u64)));
    for slot in out.iter_mut().take(width) {
        let z: f64 = StandardNormal.sample(&mut rng);
        *slot = z as f32;
    }
}

/// Builds the attributed graph for an instance. Pure and deterministic.
pub fn build_graph(inst: &CnfInstance, mode: FeatureMode) -> LiteralClauseGraph {
    let n_vars = inst.num_vars() as usize;
    let n_clauses = inst.num_clauses();

    let mut edges_pos_clause = Vec::new();
    let mut edges_neg_clause = Vec::new();
    let mut clause_pos_degree = vec![0u32; n_clauses];
    let mut clause_neg_degree = vec![0u32; n_clauses];
    for (c, clause) in inst.clauses().iter().enumerate() {
        for &lit in clause {
            let v = lit.unsigned_abs() - 1;
            if lit > 0 {
                edges_pos_clause.push((v, c as u32));
                clause_pos_degree[c] += 1;
            } else {
                edges_neg_clause.push((v, c as u32));
                clause_neg_degree[c] += 1;
            }
        }
    }

    let counts = count_occurrences(inst);

    let mut clause_features_buf = vec![0f32; n_clauses * CLAUSE_FEATURES];
    let mut pos_lit_features = vec![0f32; n_vars * LITERAL_FEATURES];
    let mut neg_lit_features = vec![0f32; n_vars * LITERAL_FEATURES];

    match mode {
        FeatureMode::CustomPlusPe | FeatureMode::CustomNoPe => {
            for c in 0..n_clauses {
                let mut feats = clause_features(inst, c);
                if mode == FeatureMode::CustomNoPe {
                    feats[7..].fill(0.0);
                }
                for (dst, src) in clause_features_buf[c * CLAUSE_FEATURES..]
                    .iter_mut()
                    .zip(feats)
                {
                    *dst = src as f32;
                }
            }
            for v in 0..n_vars {
                let m = inst.num_clauses();
                let pos = literal_features_from_counts(&counts, v, true, m);
                let neg = literal_features_from_counts(&counts, v, false, m);
                for i in 0..LITERAL_FEATURES {
                    pos_lit_features[v * LITERAL_FEATURES + i] = pos[i] as f32;
                    neg_lit_features[v * LITERAL_FEATURES + i] = neg[i] as f32;
                }
            }
        }
        FeatureMode::Random { seed } => {
            for c in 0..n_clauses {
                random_row(
                    seed,
                    0,
                    c,
                    CLAUSE_FEATURES,
                    &mut clause_features_buf[c * CLAUSE_FEATURES..(c + 1) * CLAUSE_FEATURES],
                );
            }
            for v in 0..n_vars {
                random_row(
                    seed,
                    1,
                    v,
                    LITERAL_FEATURES,
                    &mut pos_lit_features[v * LITERAL_FEATURES..(v + 1) * LITERAL_FEATURES],
                );
                random_row(
                    seed,
                    2,
                    v,
                    LITERAL_FEATURES,
                    &mut neg_lit_features[v * LITERAL_FEATURES..(v + 1) * LITERAL_FEATURES],
                );
            }
        }
        FeatureMode::NodeTypeOneHot => {
            for c in 0..n_clauses {
                clause_features_buf[c * CLAUSE_FEATURES] = 1.0;
            }
            for v in 0..n_vars {
                pos_lit_features[v * LITERAL_FEATURES + 1] = 1.0;
                neg_lit_features[v * LITERAL_FEATURES + 2] = 1.0;
            }
        }
    }

    LiteralClauseGraph {
        n_clauses,
        n_vars,
        edges_pos_clause,
        edges_neg_clause,
        clause_features: clause_features_buf,
        pos_lit_features,
        neg_lit_features,
        clause_pos_degree,
        clause_neg_degree,
        pos_clause_degree: counts.pos,
        neg_clause_degree: counts.neg,
    }
}

/// Writes the graph as a plain-text columnar file: a header with the schema
/// version, a node table (`id type feat...`) and an edge table
/// (`src dst relation`). Intended for inspection and external tooling.
pub fn export_graph<W: Write>(graph: &LiteralClauseGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# lcg-export v{FEATURIZER_VERSION}")?;
    writeln!(
        w,
        "# nodes {} clauses {} vars {}",
        graph.n_nodes(),
        graph.n_clauses(),
        graph.n_vars()
    )?;
    writeln!(w, "# node table: id type features...")?;
    for c in 0..graph.n_clauses() {
        write!(w, "{c} clause")?;
        for f in graph.clause_feature_row(c) {
            write!(w, " {f}")?;
        }
        writeln!(w)?;
    }
    let base = graph.n_clauses();
    for v in 0..graph.n_vars() {
        write!(w, "{} pos", base + 2 * v)?;
        for f in graph.pos_lit_feature_row(v) {
            write!(w, " {f}")?;
        }
        writeln!(w)?;
        write!(w, "{} neg", base + 2 * v + 1)?;
        for f in graph.neg_lit_feature_row(v) {
            write!(w, " {f}")?;
        }
        writeln!(w)?;
    }
    writeln!(
        w,
        "# edge table: src dst relation ({} lit-clause, {} pos-neg)",
        graph.n_lit_clause_edges(),
        graph.n_pos_neg_edges()
    )?;
    for &(v, c) in graph.edges_pos_clause() {
        writeln!(w, "{} {} pos-in-clause", base + 2 * v as usize, c)?;
    }
    for &(v, c) in graph.edges_neg_clause() {
        writeln!(w, "{} {} neg-in-clause", base + 2 * v as usize + 1, c)?;
    }
    for v in 0..graph.n_vars() {
        writeln!(w, "{} {} pos-neg-pair", base + 2 * v, base + 2 * v + 1)?;
    }
    Ok(())
}

pub fn export_graph_file(graph: &LiteralClauseGraph, path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    export_graph(graph, std::io::BufWriter::new(file))
}
