//! Simulated solver-runtime oracle.
//!
//! Each solver profile produces strictly positive runtimes
//!
//! ```text
//! t_k = base_k * exp(w_k . phi) * (1 + alpha_k * u) * exp(noise_k * z)
//! ```
//!
//! where `phi` is the instance's global feature vector, `u in [0,1)` is
//! derived from a digest of the clause *shape sequence* (per-clause length
//! and sign pattern, in order) and `z` is a standard normal derived from a
//! digest of the clause *content multiset*. The shape sequence is sensitive
//! to clause order but invariant under variable relabeling; the content
//! multiset is the opposite. So with `alpha > 0` clause shuffles move the
//! runtime directly, while variable shuffles act only through the noise
//! term, mirroring how real solvers react to clause order far more than to
//! variable names.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::cnf::CnfInstance;
use crate::config::KvConfig;
use crate::features::{feature_index, global_features, GLOBAL_FEATURES};
use crate::util::{mix64, unit_from_hash, Fnv1a};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("profile {0}: {1}")]
    BadProfile(String, String),
    #[error("oracle config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// One simulated solver.
#[derive(Debug, Clone)]
pub struct SolverProfile {
    pub name: String,
    /// Baseline runtime in seconds.
    pub base: f64,
    /// Sparse sensitivity weights over global features: `(index, weight)`.
    pub weights: Vec<(usize, f64)>,
    /// Clause-order sensitivity amplitude, >= 0.
    pub alpha: f64,
    /// Multiplicative lognormal noise scale, >= 0.
    pub noise_scale: f64,
}

impl SolverProfile {
    pub fn validate(&self) -> Result<(), OracleError> {
        let err = |m: &str| Err(OracleError::BadProfile(self.name.clone(), m.into()));
        if !(self.base > 0.0) {
            return err("base runtime must be positive");
        }
        if self.alpha < 0.0 {
            return err("alpha must be nonnegative");
        }
        if self.noise_scale < 0.0 {
            return err("noise scale must be nonnegative");
        }
        if self.weights.iter().any(|&(i, _)| i >= GLOBAL_FEATURES) {
            return err("weight index out of range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub seed: u64,
    pub profiles: Vec<SolverProfile>,
}

impl OracleSpec {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.profiles.is_empty() {
            return Err(OracleError::BadConfig("no solver profiles".into()));
        }
        self.profiles.iter().try_for_each(|p| p.validate())
    }

    pub fn solver_names(&self) -> Vec<String> {
        self.profiles.iter().map(|p| p.name.clone()).collect()
    }

    /// Reads a flat key-value oracle description:
    ///
    /// ```text
    /// seed = 7
    /// solvers = fast,steady
    /// base = 0.5,1.0
    /// alpha = 0,0
    /// noise = 0.02,0.02
    /// weights.0 = horn_frac:-4.0,ternary_frac:0.5
    /// weights.1 =
    /// ```
    pub fn from_config(cfg: &KvConfig) -> Result<Self, OracleError> {
        let seed: u64 = cfg.get_parsed("seed")?.unwrap_or(0);
        let names = cfg
            .get_list("solvers")
            .ok_or_else(|| OracleError::BadConfig("missing `solvers`".into()))?;
        let k = names.len();
        let base = cfg
            .get_f64_list("base")?
            .ok_or_else(|| OracleError::BadConfig("missing `base`".into()))?;
        let alpha = cfg.get_f64_list("alpha")?.unwrap_or_else(|| vec![0.0; k]);
        let noise = cfg.get_f64_list("noise")?.unwrap_or_else(|| vec![0.0; k]);
        if base.len() != k || alpha.len() != k || noise.len() != k {
            return Err(OracleError::BadConfig(format!(
                "base/alpha/noise must each list {k} values"
            )));
        }
        let mut profiles = Vec::with_capacity(k);
        for (i, name) in names.into_iter().enumerate() {
            let mut weights = Vec::new();
            if let Some(spec) = cfg.get(&format!("weights.{i}")) {
                for pair in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (fname, value) = pair.split_once(':').ok_or_else(|| {
                        OracleError::BadConfig(format!("weight {pair:?} is not name:value"))
                    })?;
                    let idx = feature_index(fname.trim()).ok_or_else(|| {
                        OracleError::BadConfig(format!("unknown feature {fname:?}"))
                    })?;
                    let value: f64 = value.trim().parse().map_err(|_| {
                        OracleError::BadConfig(format!("bad weight value in {pair:?}"))
                    })?;
                    weights.push((idx, value));
                }
            }
            profiles.push(SolverProfile {
                name,
                base: base[i],
                weights,
                alpha: alpha[i],
                noise_scale: noise[i],
            });
        }
        let spec = Self { seed, profiles };
        spec.validate()?;
        Ok(spec)
    }
}

/// Digest of the clause shape sequence: per-clause length and sign pattern,
/// in clause order. Invariant under variable relabeling.
pub fn shape_sequence_digest(inst: &CnfInstance) -> u64 {
    let mut h = Fnv1a::new();
    h.write_u64(inst.num_clauses() as u64);
    for clause in inst.clauses() {
        h.write_u64(clause.len() as u64);
        for &lit in clause {
            h.write(&[u8::from(lit < 0)]);
        }
    }
    h.finish()
}

/// Digest of the clause content multiset: per-clause literal hashes,
/// combined in sorted order. Invariant under clause reordering.
pub fn content_multiset_digest(inst: &CnfInstance) -> u64 {
    let mut clause_hashes: Vec<u64> = inst
        .clauses()
        .iter()
        .map(|clause| {
            let mut h = Fnv1a::new();
            for &lit in clause {
                h.write_i32(lit);
            }
            h.finish()
        })
        .collect();
    clause_hashes.sort_unstable();
    let mut h = Fnv1a::new();
    h.write_u64(inst.num_vars() as u64);
    for ch in clause_hashes {
        h.write_u64(ch);
    }
    h.finish()
}

/// Simulated runtimes of every profile on one instance. Deterministic in
/// `(instance contents, spec)`.
pub fn oracle_runtimes(inst: &CnfInstance, spec: &OracleSpec) -> Vec<f64> {
    let phi = global_features(inst);
    let shape = shape_sequence_digest(inst);
    let content = content_multiset_digest(inst);
    spec.profiles
        .iter()
        .enumerate()
        .map(|(k, profile)| {
            let exponent: f64 =
                profile.weights.iter().map(|&(i, w)| w * phi[i]).sum();
            let mut t = profile.base * exponent.exp();
            if profile.alpha > 0.0 {
                let mut h = Fnv1a::new();
                h.write_u64(shape).write_u64(k as u64);
                t *= 1.0 + profile.alpha * unit_from_hash(h.finish());
            }
            if profile.noise_scale > 0.0 {
                let mut h = Fnv1a::new();
                h.write_u64(spec.seed)
                    .write_u64(content)
                    .write_u64(k as u64)
                    .write(b"noise");
                let mut rng = ChaCha8Rng::seed_from_u64(mix64(h.finish()));
                let z: f64 = StandardNormal.sample(&mut rng);
                t *= (profile.noise_scale * z).exp();
            }
            t
        })
        .collect()
}
