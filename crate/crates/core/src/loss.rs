//! Runtime-regret loss.
//!
//! For probabilities `p` over solvers and measured runtimes `t` with best
//! time `t* = min_k t_k`, the per-instance loss is the squared gap between
//! the expected runtime under `p` and the best achievable one:
//! `(sum_k p_k t_k - t*)^2`. A batch loss is the mean over instances.
//! Unlike cross-entropy, mistakes cost in proportion to the extra runtime
//! they cause.

use crate::nn::NnError;

/// Per-instance regret loss. `best` must be `min(runtimes)`.
pub fn regret_loss(probs: &[f64], runtimes: &[f64], best: f64) -> Result<f64, NnError> {
    let gap = expected_gap(probs, runtimes, best)?;
    Ok(gap * gap)
}

/// Gradient of the regret loss with respect to the probabilities:
/// `dL/dp_k = 2 (sum p t - t*) t_k`.
pub fn regret_loss_grad(probs: &[f64], runtimes: &[f64], best: f64) -> Result<Vec<f64>, NnError> {
    let gap = expected_gap(probs, runtimes, best)?;
    Ok(runtimes.iter().map(|&t| 2.0 * gap * t).collect())
}

fn expected_gap(probs: &[f64], runtimes: &[f64], best: f64) -> Result<f64, NnError> {
    if probs.len() != runtimes.len() {
        return Err(NnError::DimensionMismatch(format!(
            "{} probabilities vs {} runtimes",
            probs.len(),
            runtimes.len()
        )));
    }
    let expected: f64 = probs.iter().zip(runtimes).map(|(p, t)| p * t).sum();
    Ok(expected - best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_hot_on_best_solver_is_zero() {
        let t = [3.0, 1.0, 7.0];
        let p = [0.0, 1.0, 0.0];
        assert_eq!(regret_loss(&p, &t, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_value() {
        let loss = regret_loss(&[0.5, 0.5], &[1.0, 10.0], 1.0).unwrap();
        assert!((loss - 20.25).abs() < 1e-12);
    }

    #[test]
    fn equal_runtimes_are_free() {
        let t = [4.2, 4.2, 4.2];
        for p in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]] {
            assert!(regret_loss(&p, &t, 4.2).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn nonnegative_and_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let k = rng.gen_range(2..6);
            let mut p: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sum: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= sum);
            let t: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..100.0)).collect();
            let best = t.iter().cloned().fold(f64::INFINITY, f64::min);
            let loss = regret_loss(&p, &t, best).unwrap();
            assert!(loss >= 0.0);

            // Joint permutation of solvers leaves the loss unchanged.
            let mut perm: Vec<usize> = (0..k).collect();
            perm.reverse();
            let p2: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            let t2: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
            assert!((regret_loss(&p2, &t2, best).unwrap() - loss).abs() < 1e-9);
        }
    }

    #[test]
    fn grad_matches_definition() {
        let p = [0.5, 0.5];
        let t = [1.0, 10.0];
        let g = regret_loss_grad(&p, &t, 1.0).unwrap();
        // gap = 4.5; dL/dp = 2*4.5*t
        assert!((g[0] - 9.0).abs() < 1e-12);
        assert!((g[1] - 90.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(regret_loss(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }
}
