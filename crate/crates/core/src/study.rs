//! Clause/variable shuffle runtime study.
//!
//! For each sampled instance, a fixed solver is run on `t` clause-shuffled
//! and `t` variable-shuffled variants; per-instance statistics of both
//! shuffle kinds come out as one CSV row, sorted by ascending overall mean
//! runtime. This reproduces, at harness scale, the observation that clause
//! order can swing solver runtimes while variable names barely matter.

use std::fmt::Write as _;

use crate::cnf::{permute, CnfInstance, PermutationKind, PermutationSpec};
use crate::runner::LabelError;
use crate::util::{mean, mix64, std_dev};

pub const DEFAULT_STUDY_INSTANCES: usize = 30;
pub const DEFAULT_STUDY_SHUFFLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuffleStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

fn stats(samples: &[f64]) -> ShuffleStats {
    ShuffleStats {
        mean: mean(samples),
        min: samples.iter().cloned().fold(f64::INFINITY, f64::min),
        max: samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        std: std_dev(samples),
    }
}

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub instance_id: String,
    pub clause: ShuffleStats,
    pub variable: ShuffleStats,
    pub clause_samples: Vec<f64>,
    pub variable_samples: Vec<f64>,
}

/// Runs the study. `measure` returns the runtime of the solver under test
/// on one (shuffled) instance; shuffle seeds derive from `seed`, the
/// instance position and the shuffle index. Rows are sorted by ascending
/// mean over all `2t` samples.
pub fn permute_study(
    instances: &[CnfInstance],
    t: usize,
    seed: u64,
    measure: &dyn Fn(&CnfInstance) -> Result<f64, LabelError>,
) -> Result<Vec<StudyRow>, LabelError> {
    let mut rows = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let samples = |kind: PermutationKind, tag: u64| -> Result<Vec<f64>, LabelError> {
            (0..t)
                .map(|j| {
                    let s = mix64(seed ^ mix64(i as u64) ^ mix64(tag << 32 | j as u64));
                    measure(&permute(inst, PermutationSpec { kind, seed: s }))
                })
                .collect()
        };
        let clause_samples = samples(PermutationKind::ClauseShuffle, 1)?;
        let variable_samples = samples(PermutationKind::VariableShuffle, 2)?;
        rows.push(StudyRow {
            instance_id: inst.source_id().to_string(),
            clause: stats(&clause_samples),
            variable: stats(&variable_samples),
            clause_samples,
            variable_samples,
        });
    }
    rows.sort_by(|a, b| {
        let ma = (a.clause.mean + a.variable.mean) / 2.0;
        let mb = (b.clause.mean + b.variable.mean) / 2.0;
        ma.total_cmp(&mb).then_with(|| a.instance_id.cmp(&b.instance_id))
    });
    Ok(rows)
}

/// CSV with per-kind statistics followed by the raw samples
/// (`c_1..c_t,v_1..v_t`).
pub fn study_to_csv(rows: &[StudyRow], t: usize) -> String {
    let mut out = String::from(
        "instance_id,clause_mean,clause_min,clause_max,clause_std,\
         var_mean,var_min,var_max,var_std",
    );
    for j in 1..=t {
        let _ = write!(out, ",c_{j}");
    }
    for j in 1..=t {
        let _ = write!(out, ",v_{j}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.instance_id,
            row.clause.mean,
            row.clause.min,
            row.clause.max,
            row.clause.std,
            row.variable.mean,
            row.variable.min,
            row.variable.max,
            row.variable.std,
        );
        for s in &row.clause_samples {
            let _ = write!(out, ",{s}");
        }
        for s in &row.variable_samples {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
    }
    out
}

/// One-paragraph summary: how often clause shuffling dominates.
pub fn study_summary(rows: &[StudyRow]) -> String {
    let n = rows.len();
    let clause_dominant = rows.iter().filter(|r| r.clause.std > r.variable.std).count();
    let mean_clause_std = mean(&rows.iter().map(|r| r.clause.std).collect::<Vec<_>>());
    let mean_var_std = mean(&rows.iter().map(|r| r.variable.std).collect::<Vec<_>>());
    format!(
        "{n} instances: clause-shuffle std exceeds variable-shuffle std on \
         {clause_dominant}/{n}; mean std {mean_clause_std:.4}s (clause) vs \
         {mean_var_std:.4}s (variable)\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::feature_index;
    use crate::oracle::{oracle_runtimes, OracleSpec, SolverProfile};
    use crate::synth::{generate, SyntheticSpec};

    fn instances(n: usize) -> Vec<CnfInstance> {
        generate(&SyntheticSpec {
            n_instances: n,
            min_vars: 10,
            max_vars: 25,
            min_ratio: 2.0,
            max_ratio: 4.0,
            length_weights: [0.1, 0.3, 0.3, 0.2, 0.1],
            seed: 3,
        })
    }

    fn oracle_measure(spec: OracleSpec) -> impl Fn(&CnfInstance) -> Result<f64, LabelError> {
        move |inst| Ok(oracle_runtimes(inst, &spec)[0])
    }

    fn profile(alpha: f64, noise: f64) -> OracleSpec {
        OracleSpec {
            seed: 6,
            profiles: vec![SolverProfile {
                name: "kit".into(),
                base: 1.0,
                weights: vec![(feature_index("clause_var_ratio").unwrap(), 0.2)],
                alpha,
                noise_scale: noise,
            }],
        }
    }

    #[test]
    fn row_and_sample_counts() {
        let insts = instances(6);
        let measure = oracle_measure(profile(0.3, 0.01));
        let rows = permute_study(&insts, 5, 42, &measure).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!(row.clause_samples.len(), 5);
            assert_eq!(row.variable_samples.len(), 5);
        }
        // Sorted ascending by mean.
        for pair in rows.windows(2) {
            let a = (pair[0].clause.mean + pair[0].variable.mean) / 2.0;
            let b = (pair[1].clause.mean + pair[1].variable.mean) / 2.0;
            assert!(a <= b);
        }
        let csv = study_to_csv(&rows, 5);
        assert_eq!(csv.lines().count(), 7);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 9 + 10);
    }

    #[test]
    fn order_insensitive_oracle_has_zero_clause_std() {
        let insts = instances(5);
        let measure = oracle_measure(profile(0.0, 0.05));
        let rows = permute_study(&insts, 8, 1, &measure).unwrap();
        for row in &rows {
            assert_eq!(row.clause.std, 0.0, "{}", row.instance_id);
            assert_eq!(row.clause.min, row.clause.max);
        }
    }

    #[test]
    fn order_sensitive_oracle_dominates_variable_shuffles() {
        let insts = instances(20);
        let measure = oracle_measure(profile(0.5, 0.02));
        let rows = permute_study(&insts, 10, 7, &measure).unwrap();
        let dominated = rows.iter().filter(|r| r.clause.std > r.variable.std).count();
        assert!(dominated as f64 >= 0.8 * rows.len() as f64, "{dominated}/20");
        let summary = study_summary(&rows);
        assert!(summary.contains("20 instances"));
    }

    #[test]
    fn study_is_deterministic() {
        let insts = instances(4);
        let measure = oracle_measure(profile(0.4, 0.01));
        let a = permute_study(&insts, 6, 9, &measure).unwrap();
        let b = permute_study(&insts, 6, 9, &measure).unwrap();
        assert_eq!(study_to_csv(&a, 6), study_to_csv(&b, 6));
    }
}
