//! Synthetic CNF instance generation for desk-scale experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::CnfInstance;
use crate::util::mix64;

/// Parameters of a random instance family. Clause lengths are drawn from
/// `length_weights` (lengths 1..=5, weights normalized internally); each
/// clause picks that many distinct variables uniformly and flips a fair
/// coin per sign.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub n_instances: usize,
    pub min_vars: u32,
    pub max_vars: u32,
    /// Clause/variable ratio range; the clause count is `round(ratio * vars)`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub length_weights: [f64; 5],
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_vars == 0 || self.min_vars > self.max_vars {
            return Err("variable range must satisfy 1 <= min <= max".into());
        }
        if !(self.min_ratio > 0.0 && self.min_ratio <= self.max_ratio) {
            return Err("ratio range must satisfy 0 < min <= max".into());
        }
        if self.length_weights.iter().any(|&w| w < 0.0)
            || self.length_weights.iter().sum::<f64>() <= 0.0
        {
            return Err("length weights must be nonnegative with positive sum".into());
        }
        Ok(())
    }
}

fn sample_length(weights: &[f64; 5], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut u = rng.gen_range(0.0..total);
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i + 1;
        }
        u -= w;
    }
    5
}

/// Generates one instance. Deterministic in `(spec.seed, index)`, so
/// instances can be produced independently and in parallel.
pub fn generate_one(spec: &SyntheticSpec, index: usize) -> CnfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(spec.seed).wrapping_add(index as u64));
    let n_vars = rng.gen_range(spec.min_vars..=spec.max_vars);
    let ratio = if spec.min_ratio == spec.max_ratio {
        spec.min_ratio
    } else {
        rng.gen_range(spec.min_ratio..spec.max_ratio)
    };
    let n_clauses = ((ratio * n_vars as f64).round() as usize).max(1);
    let total_weight: f64 = spec.length_weights.iter().sum();

    let mut vars: Vec<u32> = (1..=n_vars).collect();
    let mut clauses = Vec::with_capacity(n_clauses);
    for _ in 0..n_clauses {
        let len = sample_length(&spec.length_weights, total_weight, &mut rng).min(n_vars as usize);
        // Partial Fisher-Yates: first `len` entries are a uniform sample
        // without replacement.
        for i in 0..len {
            let j = rng.gen_range(i..vars.len());
            vars.swap(i, j);
        }
        let clause: Vec<i32> = vars[..len]
            .iter()
            .map(|&v| if rng.gen::<bool>() { v as i32 } else { -(v as i32) })
            .collect();
        clauses.push(clause);
    }
    CnfInstance::new(n_vars, clauses)
        .expect("generated instance is valid")
        .with_source_id(format!("synth-{:05}", index))
}

/// Generates the whole family.
pub fn generate(spec: &SyntheticSpec) -> Vec<CnfInstance> {
    (0..spec.n_instances).map(|i| generate_one(spec, i)).collect()
}

/// Generates and writes instances as `<source_id>.cnf` under `dir`,
/// returning the file paths.
pub fn generate_to_dir(
    spec: &SyntheticSpec,
    dir: &std::path::Path,
) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(spec.n_instances);
    for inst in generate(spec) {
        let path = dir.join(format!("{}.cnf", inst.source_id()));
        std::fs::write(&path, crate::cnf::serialize_dimacs(&inst))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_spec_is_exact() {
        let spec = SyntheticSpec {
            n_instances: 10,
            min_vars: 3,
            max_vars: 3,
            min_ratio: 1.0,
            max_ratio: 1.0,
            length_weights: [0.0, 0.0, 1.0, 0.0, 0.0],
            seed: 4,
        };
        for inst in generate(&spec) {
            assert_eq!(inst.num_vars(), 3);
            assert_eq!(inst.num_clauses(), 3);
            assert!(inst.clauses().iter().all(|c| c.len() == 3));
            // Distinct variables within each clause.
            for c in inst.clauses() {
                let mut vs: Vec<u32> = c.iter().map(|l| l.unsigned_abs()).collect();
                vs.sort();
                vs.dedup();
                assert_eq!(vs.len(), 3);
            }
        }
    }

    #[test]
    fn same_seed_same_files() {
        let spec = SyntheticSpec {
            n_instances: 5,
            min_vars: 5,
            max_vars: 30,
            min_ratio: 1.0,
            max_ratio: 4.0,
            length_weights: [0.2, 0.2, 0.2, 0.2, 0.2],
            seed: 123,
        };
        let a = generate(&spec);
        let b = generate(&spec);
        assert_eq!(a, b);
        let other = SyntheticSpec { seed: 124, ..spec };
        assert_ne!(generate(&other), a);
    }

    #[test]
    fn length_histogram_tracks_weights() {
        let spec = SyntheticSpec {
            n_instances: 1000,
            min_vars: 10,
            max_vars: 20,
            min_ratio: 2.0,
            max_ratio: 3.0,
            length_weights: [0.0, 0.6, 0.4, 0.0, 0.0],
            seed: 9,
        };
        let mut counts = [0usize; 6];
        let mut total = 0usize;
        for inst in generate(&spec) {
            for c in inst.clauses() {
                counts[c.len()] += 1;
                total += 1;
            }
        }
        let frac2 = counts[2] as f64 / total as f64;
        let frac3 = counts[3] as f64 / total as f64;
        assert!((frac2 - 0.6).abs() < 0.05, "binary fraction {frac2}");
        assert!((frac3 - 0.4).abs() < 0.05, "ternary fraction {frac3}");
        assert_eq!(counts[1] + counts[4] + counts[5], 0);
    }

    #[test]
    fn validation_catches_bad_specs() {
        let ok = SyntheticSpec {
            n_instances: 1,
            min_vars: 2,
            max_vars: 3,
            min_ratio: 1.0,
            max_ratio: 2.0,
            length_weights: [1.0, 0.0, 0.0, 0.0, 0.0],
            seed: 0,
        };
        assert!(ok.validate().is_ok());
        assert!(SyntheticSpec { min_vars: 0, ..ok }.validate().is_err());
        assert!(SyntheticSpec { max_ratio: 0.5, ..ok }.validate().is_err());
        assert!(SyntheticSpec { length_weights: [0.0; 5], ..ok }.validate().is_err());
    }
}
