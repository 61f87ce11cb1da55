//! Instance-level summary features for the feature-vector baselines.
//!
//! A fixed, versioned 16-dimensional vector of order-free statistics:
//! problem size, clause-type fractions, clause-length statistics, variable
//! occurrence statistics and polarity-balance statistics. Standard
//! deviations are population deviations.

use crate::cnf::CnfInstance;
use crate::util::{mean, std_dev};

pub const GLOBAL_FEATURES: usize = 16;

/// Feature names, index-aligned with [`global_features`]. Also the key
/// vocabulary for oracle sensitivity weights.
pub const GLOBAL_FEATURE_NAMES: [&str; GLOBAL_FEATURES] = [
    "num_vars",
    "num_clauses",
    "clause_var_ratio",
    "horn_frac",
    "binary_frac",
    "ternary_frac",
    "mean_clause_len",
    "min_clause_len",
    "max_clause_len",
    "std_clause_len",
    "mean_var_occ",
    "std_var_occ",
    "mean_pos_frac",
    "std_pos_frac",
    "mean_polarity_ratio",
    "std_polarity_ratio",
];

pub fn feature_index(name: &str) -> Option<usize> {
    GLOBAL_FEATURE_NAMES.iter().position(|&n| n == name)
}

/// Computes the global feature vector. Invariant under both clause
/// reordering and variable relabeling.
pub fn global_features(inst: &CnfInstance) -> [f64; GLOBAL_FEATURES] {
    let n = inst.num_vars() as f64;
    let m = inst.num_clauses();
    let mf = m as f64;

    let lens: Vec<f64> = inst.clauses().iter().map(|c| c.len() as f64).collect();
    let mut horn = 0usize;
    let mut binary = 0usize;
    let mut ternary = 0usize;
    let mut pos_fracs = Vec::with_capacity(m);
    let nv = inst.num_vars() as usize;
    let mut pos_occ = vec![0u32; nv];
    let mut neg_occ = vec![0u32; nv];
    for clause in inst.clauses() {
        let pos = clause.iter().filter(|&&l| l > 0).count();
        if pos <= 1 {
            horn += 1;
        }
        match clause.len() {
            2 => binary += 1,
            3 => ternary += 1,
            _ => {}
        }
        pos_fracs.push(pos as f64 / clause.len() as f64);
        for &lit in clause {
            let v = (lit.unsigned_abs() - 1) as usize;
            if lit > 0 {
                pos_occ[v] += 1;
            } else {
                neg_occ[v] += 1;
            }
        }
    }
    let mut var_occ: Vec<f64> = (0..nv).map(|v| (pos_occ[v] + neg_occ[v]) as f64).collect();
    let mut polarity_ratio: Vec<f64> = (0..nv)
        .map(|v| pos_occ[v] as f64 / (neg_occ[v] as f64 + 1.0))
        .collect();

    // Canonical summation order: permuting clauses or relabeling variables
    // must leave every statistic bit-identical, not just mathematically
    // equal, so reductions run over sorted values.
    let mut lens = lens;
    let mut pos_fracs = pos_fracs;
    for v in [&mut lens, &mut pos_fracs, &mut var_occ, &mut polarity_ratio] {
        v.sort_by(f64::total_cmp);
    }

    let frac = |count: usize| if m == 0 { 0.0 } else { count as f64 / mf };
    [
        n,
        mf,
        mf / n,
        frac(horn),
        frac(binary),
        frac(ternary),
        mean(&lens),
        lens.iter().cloned().fold(f64::INFINITY, f64::min).min(1e18),
        lens.iter().cloned().fold(0.0, f64::max),
        std_dev(&lens),
        mean(&var_occ),
        std_dev(&var_occ),
        mean(&pos_fracs),
        std_dev(&pos_fracs),
        mean(&polarity_ratio),
        std_dev(&polarity_ratio),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, permute, PermutationKind, PermutationSpec};

    fn t1() -> CnfInstance {
        parse_dimacs(b"p cnf 3 3\n1 -2 0\n-1 2 3 0\n-1 0").unwrap()
    }

    #[test]
    fn t1_values() {
        let f = global_features(&t1());
        assert_eq!(f[feature_index("num_vars").unwrap()], 3.0);
        assert_eq!(f[feature_index("num_clauses").unwrap()], 3.0);
        assert_eq!(f[feature_index("clause_var_ratio").unwrap()], 1.0);
        assert!((f[feature_index("horn_frac").unwrap()] - 2.0 / 3.0).abs() < 1e-12);
        assert!((f[feature_index("binary_frac").unwrap()] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f[feature_index("ternary_frac").unwrap()] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(f[feature_index("mean_clause_len").unwrap()], 2.0);
        assert_eq!(f[feature_index("min_clause_len").unwrap()], 1.0);
        assert_eq!(f[feature_index("max_clause_len").unwrap()], 3.0);
        // Occurrences per variable: 3, 2, 1.
        assert_eq!(f[feature_index("mean_var_occ").unwrap()], 2.0);
        // Polarity ratios: 1/3, 1/2, 1/1.
        let want = (1.0 / 3.0 + 0.5 + 1.0) / 3.0;
        assert!((f[feature_index("mean_polarity_ratio").unwrap()] - want).abs() < 1e-12);
    }

    #[test]
    fn unit_clause_instance_degenerates() {
        let inst = parse_dimacs(b"p cnf 1 1\n1 0").unwrap();
        let f = global_features(&inst);
        assert_eq!(f[feature_index("mean_clause_len").unwrap()], 1.0);
        assert_eq!(f[feature_index("min_clause_len").unwrap()], 1.0);
        assert_eq!(f[feature_index("max_clause_len").unwrap()], 1.0);
        assert_eq!(f[feature_index("std_clause_len").unwrap()], 0.0);
    }

    #[test]
    fn permutation_invariant() {
        let inst = t1();
        let base = global_features(&inst);
        for seed in 0..10 {
            for kind in [PermutationKind::ClauseShuffle, PermutationKind::VariableShuffle] {
                let p = permute(&inst, PermutationSpec { kind, seed });
                assert_eq!(global_features(&p), base, "{kind:?} seed {seed}");
            }
        }
    }
}
