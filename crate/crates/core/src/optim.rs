//! Adam optimizer with bias correction.

use crate::nn::{Gradients, ModelParameters};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First/second moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }
}

/// One bias-corrected Adam update over the flat parameter vector. Updated
/// parameters are rounded back to f32 precision so checkpoints stay lossless.
pub fn adam_step(params: &mut ModelParameters, grads: &Gradients, state: &mut AdamState, lr: f64) {
    assert_eq!(params.len(), state.m.len(), "optimizer state size mismatch");
    assert_eq!(params.len(), grads.data().len(), "gradient size mismatch");
    state.step += 1;
    let t = state.step as i32;
    let corr1 = 1.0 - BETA1.powi(t);
    let corr2 = 1.0 - BETA2.powi(t);
    let data = params.data_mut();
    for i in 0..data.len() {
        let g = grads.data()[i];
        state.m[i] = BETA1 * state.m[i] + (1.0 - BETA1) * g;
        state.v[i] = BETA2 * state.v[i] + (1.0 - BETA2) * g * g;
        let m_hat = state.m[i] / corr1;
        let v_hat = state.v[i] / corr2;
        data[i] = ((data[i] - lr * m_hat / (v_hat.sqrt() + EPSILON)) as f32) as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FeatureMode;
    use crate::nn::ModelConfig;

    fn tiny_params(seed: u64) -> ModelParameters {
        ModelParameters::init(
            ModelConfig {
                hidden: 2,
                layers: 1,
                num_solvers: 2,
                homogeneous: false,
                feature_mode: FeatureMode::CustomPlusPe,
            },
            seed,
        )
    }

    fn grads_with(params: &ModelParameters, value: f64) -> Gradients {
        Gradients::from_vec(vec![value; params.len()])
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = tiny_params(3);
        let before = p.data().to_vec();
        let g = Gradients::zeros(&p);
        let mut state = AdamState::new(p.len());
        adam_step(&mut p, &g, &mut state, 1e-3);
        assert_eq!(p.data(), &before[..]);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        // With constant gradient 1 and t=1: m_hat = 1, v_hat = 1, so the
        // update is lr / (1 + eps).
        let mut p = tiny_params(5);
        let before = p.data().to_vec();
        let g = grads_with(&p, 1.0);
        let mut state = AdamState::new(p.len());
        let lr = 1e-3;
        adam_step(&mut p, &g, &mut state, lr);
        // Updated values are rounded to f32, so allow one f32 ulp of slack.
        for (after, before) in p.data().iter().zip(&before) {
            let delta = before - after;
            assert!((delta - lr / (1.0 + EPSILON)).abs() < 1e-7, "delta {delta}");
        }
    }

    #[test]
    fn identical_inputs_identical_updates() {
        let mut a = tiny_params(8);
        let mut b = tiny_params(8);
        let g = grads_with(&a, 0.37);
        let mut sa = AdamState::new(a.len());
        let mut sb = AdamState::new(b.len());
        for _ in 0..5 {
            adam_step(&mut a, &g, &mut sa, 1e-3);
            adam_step(&mut b, &g, &mut sb, 1e-3);
        }
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn moments_decay_without_gradient() {
        let mut p = tiny_params(1);
        let ones = grads_with(&p, 1.0);
        let zeros = Gradients::zeros(&p);
        let mut state = AdamState::new(p.len());
        adam_step(&mut p, &ones, &mut state, 1e-3);
        let m0 = state.moments().0[0];
        adam_step(&mut p, &zeros, &mut state, 1e-3);
        let m1 = state.moments().0[0];
        assert!((m1 - BETA1 * m0).abs() < 1e-15);
    }
}
