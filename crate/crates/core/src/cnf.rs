//! CNF instances in DIMACS format: parsing, serialization, permutation.
//!
//! The accepted grammar is the standard `.cnf` layout: optional comment
//! lines starting with `c`, one `p cnf <vars> <clauses>` header, then
//! whitespace-separated signed integers where `0` terminates a clause. A
//! final clause without a terminating `0` is accepted at end of input.
//! Some legacy benchmark files append a `%` marker and stray tokens after
//! the last clause; those are skipped with a warning.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange { literal: i64, num_vars: u32 },
    #[error("declared {declared} clauses but found {actual}")]
    ClauseCountMismatch { declared: usize, actual: usize },
    #[error("clause {index} is empty")]
    EmptyClause { index: usize },
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A CNF formula: a conjunction of clauses over variables `1..=num_vars`.
/// Literal `l > 0` is the variable `x_l`, `l < 0` its negation. Clause order
/// and within-clause literal order are preserved exactly as parsed; duplicate
/// literals are kept.
#[derive(Debug, Clone)]
pub struct CnfInstance {
    num_vars: u32,
    clauses: Vec<Vec<i32>>,
    source_id: String,
}

impl PartialEq for CnfInstance {
    /// Value identity is the formula itself; `source_id` is a label.
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for CnfInstance {}

impl CnfInstance {
    /// Builds an instance, checking the representation invariants:
    /// every `|literal|` in `[1, num_vars]` and no empty clause.
    pub fn new(num_vars: u32, clauses: Vec<Vec<i32>>) -> Result<Self, ParseError> {
        if num_vars == 0 {
            return Err(ParseError::MalformedHeader(
                "variable count must be positive".into(),
            ));
        }
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(ParseError::EmptyClause { index });
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() > num_vars {
                    return Err(ParseError::LiteralOutOfRange {
                        literal: lit as i64,
                        num_vars,
                    });
                }
            }
        }
        Ok(Self {
            num_vars,
            clauses,
            source_id: String::new(),
        })
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Total number of literal occurrences.
    pub fn num_literal_occurrences(&self) -> usize {
        self.clauses.iter().map(|c| c.len()).sum()
    }

    /// Dense index of a literal node: `2(v-1)` for `x_v`, `2(v-1)+1` for its
    /// negation. Stable indexing used by the graph builder and exports.
    pub fn literal_node_index(lit: i32) -> usize {
        debug_assert!(lit != 0);
        let var = lit.unsigned_abs() as usize;
        2 * (var - 1) + usize::from(lit < 0)
    }
}

/// How to permute an instance. Deterministic for a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationKind {
    /// Reorder clause positions.
    ClauseShuffle,
    /// Relabel variables by a bijection on `1..=num_vars`, preserving signs.
    VariableShuffle,
}

#[derive(Debug, Clone, Copy)]
pub struct PermutationSpec {
    pub kind: PermutationKind,
    pub seed: u64,
}

/// Parses DIMACS text. The returned instance carries an empty `source_id`;
/// attach one with [`CnfInstance::with_source_id`].
pub fn parse_dimacs(input: &[u8]) -> Result<CnfInstance, ParseError> {
    let text = String::from_utf8_lossy(input);
    let mut lines = text.lines().enumerate();

    // Header: skip comments and blank lines until `p cnf`.
    let (num_vars, declared) = loop {
        let Some((_, line)) = lines.next() else {
            return Err(ParseError::MalformedHeader("missing `p cnf` line".into()));
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if !line.starts_with('p') {
            return Err(ParseError::MalformedHeader(format!(
                "expected `p cnf <vars> <clauses>`, got {line:?}"
            )));
        }
        let mut parts = line.split_whitespace();
        let (p, fmt) = (parts.next(), parts.next());
        if p != Some("p") || fmt != Some("cnf") {
            return Err(ParseError::MalformedHeader(format!(
                "expected `p cnf <vars> <clauses>`, got {line:?}"
            )));
        }
        let nums: Vec<&str> = parts.collect();
        if nums.len() != 2 {
            return Err(ParseError::MalformedHeader(format!(
                "expected two counts in {line:?}"
            )));
        }
        let nv: u32 = nums[0]
            .parse()
            .map_err(|_| ParseError::MalformedHeader(format!("bad variable count {:?}", nums[0])))?;
        let nc: usize = nums[1]
            .parse()
            .map_err(|_| ParseError::MalformedHeader(format!("bad clause count {:?}", nums[1])))?;
        if nv == 0 || nv > i32::MAX as u32 {
            return Err(ParseError::MalformedHeader(format!(
                "variable count {nv} out of range"
            )));
        }
        break (nv, nc);
    };

    let mut clauses: Vec<Vec<i32>> = Vec::with_capacity(declared);
    let mut current: Vec<i32> = Vec::new();
    let mut trailing_junk = false;

    'outer: for (_, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        for token in line.split_whitespace() {
            if clauses.len() == declared {
                // All declared clauses read; legacy files append `%` or
                // stray tokens here.
                trailing_junk = true;
                break 'outer;
            }
            if token.starts_with('%') {
                trailing_junk = true;
                break 'outer;
            }
            let value: i64 = token
                .parse()
                .map_err(|_| ParseError::InvalidToken(token.to_string()))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(ParseError::EmptyClause {
                        index: clauses.len(),
                    });
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if value.unsigned_abs() > num_vars as u64 {
                    return Err(ParseError::LiteralOutOfRange {
                        literal: value,
                        num_vars,
                    });
                }
                current.push(value as i32);
            }
        }
    }
    if !current.is_empty() {
        // Final clause without a terminating 0.
        clauses.push(current);
    }
    if trailing_junk {
        log::warn!("ignoring trailing tokens after the last declared clause");
    }
    if clauses.len() != declared {
        return Err(ParseError::ClauseCountMismatch {
            declared,
            actual: clauses.len(),
        });
    }
    CnfInstance::new(num_vars, clauses)
}

/// Parses a `.cnf` file; `source_id` is the file stem.
pub fn parse_dimacs_file(path: &Path) -> Result<CnfInstance, ParseError> {
    let bytes = std::fs::read(path)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_dimacs(&bytes)?.with_source_id(id))
}

/// Canonical DIMACS serialization: header, one `0`-terminated clause per
/// line. `parse_dimacs(serialize_dimacs(x)) == x`.
pub fn serialize_dimacs(inst: &CnfInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", inst.num_vars, inst.clauses.len());
    for clause in &inst.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Applies an explicit clause-position permutation: output clause `i` is
/// input clause `perm[i]`. `perm` must be a bijection on `0..m`.
pub fn apply_clause_permutation(inst: &CnfInstance, perm: &[usize]) -> CnfInstance {
    assert_eq!(perm.len(), inst.num_clauses(), "permutation length mismatch");
    let clauses = perm.iter().map(|&i| inst.clauses[i].clone()).collect();
    CnfInstance {
        num_vars: inst.num_vars,
        clauses,
        source_id: inst.source_id.clone(),
    }
}

/// Applies an explicit variable relabeling: variable `v` becomes
/// `mapping[v-1]`, signs preserved. `mapping` must be a bijection on
/// `1..=num_vars`.
pub fn apply_variable_permutation(inst: &CnfInstance, mapping: &[u32]) -> CnfInstance {
    assert_eq!(mapping.len(), inst.num_vars as usize, "mapping length mismatch");
    let clauses = inst
        .clauses
        .iter()
        .map(|clause| {
            clause
                .iter()
                .map(|&lit| {
                    let target = mapping[(lit.unsigned_abs() - 1) as usize] as i32;
                    if lit > 0 {
                        target
                    } else {
                        -target
                    }
                })
                .collect()
        })
        .collect();
    CnfInstance {
        num_vars: inst.num_vars,
        clauses,
        source_id: inst.source_id.clone(),
    }
}

/// Permutes an instance per `spec`. ClauseShuffle preserves the multiset of
/// clauses; VariableShuffle preserves clause structure up to relabeling.
pub fn permute(inst: &CnfInstance, spec: PermutationSpec) -> CnfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        PermutationKind::ClauseShuffle => {
            let mut perm: Vec<usize> = (0..inst.num_clauses()).collect();
            perm.shuffle(&mut rng);
            apply_clause_permutation(inst, &perm)
        }
        PermutationKind::VariableShuffle => {
            let mut mapping: Vec<u32> = (1..=inst.num_vars).collect();
            mapping.shuffle(&mut rng);
            apply_variable_permutation(inst, &mapping)
        }
    }
}
