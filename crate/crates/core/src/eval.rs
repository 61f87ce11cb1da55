//! Selector evaluation: average runtime, solved percentage, accuracy,
//! cost of wrong predictions and a best-runtime quartile breakdown.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::RuntimeRecord;
use crate::util::percentile;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("missing selection for instance {0}")]
    MissingSelection(String),
    #[error("selection {selected} out of range for {num_solvers} solvers ({instance})")]
    BadSelection {
        instance: String,
        selected: usize,
        num_solvers: usize,
    },
}

/// Average selected runtime within one best-runtime quartile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartileStat {
    /// Inclusive upper best-runtime bound of the quartile (`f64::INFINITY`
    /// for the last one).
    pub upper: f64,
    pub count: usize,
    pub avg_runtime: f64,
}

/// Metrics of one selector on one set of labeled instances.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub avg_runtime: f64,
    /// Percentage of instances whose selected runtime is within the cutoff.
    pub solved_pct: f64,
    /// Fraction of instances where the selection achieves the best time
    /// (any argmin counts).
    pub accuracy: f64,
    /// Mean extra seconds over the best time, across mispredicted instances
    /// only; 0 when no mistakes were made (see `no_mistakes`).
    pub cost_of_wrong: f64,
    pub no_mistakes: bool,
    pub n_instances: usize,
    pub n_wrong: usize,
    pub quartiles: [QuartileStat; 4],
}

/// Scores `selections[i]` (a solver index) against `records[i]`. Quartile
/// boundaries are the 25/50/75 percentiles of the records' best runtimes.
pub fn evaluate(
    selections: &[usize],
    records: &[RuntimeRecord],
    cutoff: f64,
) -> Result<EvaluationReport, EvalError> {
    assert!(!records.is_empty(), "nothing to evaluate");
    if selections.len() < records.len() {
        return Err(EvalError::MissingSelection(
            records[selections.len()].instance_id.clone(),
        ));
    }
    let n = records.len();
    let mut runtime_sum = 0.0;
    let mut solved = 0usize;
    let mut correct = 0usize;
    let mut wrong_cost_sum = 0.0;
    let mut n_wrong = 0usize;
    for (record, &sel) in records.iter().zip(selections) {
        if sel >= record.runtimes.len() {
            return Err(EvalError::BadSelection {
                instance: record.instance_id.clone(),
                selected: sel,
                num_solvers: record.runtimes.len(),
            });
        }
        let t = record.runtimes[sel];
        runtime_sum += t;
        if t <= cutoff {
            solved += 1;
        }
        if t == record.best_time {
            correct += 1;
        } else {
            n_wrong += 1;
            wrong_cost_sum += t - record.best_time;
        }
    }

    let best_times: Vec<f64> = records.iter().map(|r| r.best_time).collect();
    let bounds = [
        percentile(&best_times, 0.25),
        percentile(&best_times, 0.50),
        percentile(&best_times, 0.75),
        f64::INFINITY,
    ];
    let mut q_sum = [0.0; 4];
    let mut q_count = [0usize; 4];
    for (record, &sel) in records.iter().zip(selections) {
        let q = bounds.iter().position(|&b| record.best_time <= b).unwrap();
        q_sum[q] += record.runtimes[sel];
        q_count[q] += 1;
    }
    let mut quartiles = [QuartileStat { upper: 0.0, count: 0, avg_runtime: 0.0 }; 4];
    for i in 0..4 {
        quartiles[i] = QuartileStat {
            upper: bounds[i],
            count: q_count[i],
            avg_runtime: if q_count[i] > 0 { q_sum[i] / q_count[i] as f64 } else { 0.0 },
        };
    }

    Ok(EvaluationReport {
        avg_runtime: runtime_sum / n as f64,
        solved_pct: 100.0 * solved as f64 / n as f64,
        accuracy: correct as f64 / n as f64,
        cost_of_wrong: if n_wrong > 0 { wrong_cost_sum / n_wrong as f64 } else { 0.0 },
        no_mistakes: n_wrong == 0,
        n_instances: n,
        n_wrong,
        quartiles,
    })
}

/// The hypothetical always-optimal selector.
pub fn oracle_selections(records: &[RuntimeRecord]) -> Vec<usize> {
    records.iter().map(|r| r.best_solver).collect()
}

impl EvaluationReport {
    /// Single-row CSV with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "avg_runtime,solved_pct,accuracy,cost_of_wrong,n_instances,n_wrong,\
             q1_avg,q2_avg,q3_avg,q4_avg\n",
        );
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            self.avg_runtime,
            self.solved_pct,
            self.accuracy,
            self.cost_of_wrong,
            self.n_instances,
            self.n_wrong,
            self.quartiles[0].avg_runtime,
            self.quartiles[1].avg_runtime,
            self.quartiles[2].avg_runtime,
            self.quartiles[3].avg_runtime,
        );
        out
    }

    /// Human-readable table.
    pub fn to_table(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "selector          {name}");
        let _ = writeln!(out, "instances         {}", self.n_instances);
        let _ = writeln!(out, "avg runtime (s)   {:.3}", self.avg_runtime);
        let _ = writeln!(out, "solved (%)        {:.1}", self.solved_pct);
        let _ = writeln!(out, "accuracy          {:.3}", self.accuracy);
        if self.no_mistakes {
            let _ = writeln!(out, "cost of wrong (s) -         (no mistakes)");
        } else {
            let _ = writeln!(
                out,
                "cost of wrong (s) {:.3}     ({} mispredicted)",
                self.cost_of_wrong, self.n_wrong
            );
        }
        let _ = writeln!(out, "best-runtime quartile -> avg selected runtime");
        let labels = ["[0,25%]", "(25,50%]", "(50,75%]", "(75,100%]"];
        for (label, q) in labels.iter().zip(&self.quartiles) {
            let _ = writeln!(
                out,
                "  {label:<10} n={:<5} avg={:.3}",
                q.count, q.avg_runtime
            );
        }
        out
    }
}

/// Per-instance selections CSV: `instance_id,selected,t_selected,t_star`.
pub fn selections_to_csv(records: &[RuntimeRecord], selections: &[usize]) -> String {
    let mut out = String::from("instance_id,selected,t_selected,t_star\n");
    for (r, &sel) in records.iter().zip(selections) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.instance_id, sel, r.runtimes[sel], r.best_time
        );
    }
    out
}
