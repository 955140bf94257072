use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};

/// Moment estimates for the adaptive-moment optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(num_params: usize) -> Self {
        AdamState {
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn reset(&mut self) {
        self.first_moment.iter_mut().for_each(|m| *m = 0.0);
        self.second_moment.iter_mut().for_each(|v| *v = 0.0);
        self.step_count = 0;
    }
}

/// Applies one bias-corrected adaptive-moment update to `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, learning_rate: f64) -> Result<()> {
    dim_check("adam gradients", params.len(), grads.len())?;
    dim_check("adam first moment", params.len(), state.first_moment.len())?;
    dim_check("adam second moment", params.len(), state.second_moment.len())?;
    if learning_rate.is_nan() || learning_rate <= 0.0 {
        return Err(Error::InvalidArgument(format!("learning rate must be positive, got {learning_rate}")));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite gradient entry".into()));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);
    for (((p, &g), m), v) in
        params.iter_mut().zip(grads).zip(state.first_moment.iter_mut()).zip(state.second_moment.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        *p -= learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = vec![0.5, -1.0, 2.0];
        let mut s = AdamState::new(3);
        adam_step(&mut p, &[1.0; 3], &mut s, 0.1).unwrap();
        for (after, before) in p.iter().zip([0.5, -1.0, 2.0]) {
            assert!((after - before + 0.1).abs() < 1e-6);
        }
        assert_eq!(s.step_count, 1);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.3, 0.7];
        let mut s = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut s, 0.1).unwrap();
        assert_eq!(p, vec![0.3, 0.7]);
        assert_eq!(s.first_moment, vec![0.0, 0.0]);
        assert_eq!(s.second_moment, vec![0.0, 0.0]);
    }

    #[test]
    fn two_steps_match_hand_recursion() {
        let g = 0.4;
        let lr = 0.01;
        let mut p = vec![1.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[g], &mut s, lr).unwrap();
        adam_step(&mut p, &[g], &mut s, lr).unwrap();

        // m1 = 0.1 g, v1 = 0.001 g²; m2 = 0.9 m1 + 0.1 g, v2 = 0.999 v1 + 0.001 g²
        let m1 = 0.1 * g;
        let v1 = 0.001 * g * g;
        let p1 = 1.0 - lr * (m1 / 0.1) / ((v1 / 0.001).sqrt() + 1e-8);
        let m2 = 0.9 * m1 + 0.1 * g;
        let v2 = 0.999 * v1 + 0.001 * g * g;
        let m2_hat = m2 / (1.0 - 0.81);
        let v2_hat = v2 / (1.0 - 0.999 * 0.999);
        let p2 = p1 - lr * m2_hat / (v2_hat.sqrt() + 1e-8);
        assert!((s.first_moment[0] - m2).abs() < 1e-15);
        assert!((s.second_moment[0] - v2).abs() < 1e-15);
        assert!((p[0] - p2).abs() < 1e-14);
        assert_eq!(s.step_count, 2);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        assert!(matches!(adam_step(&mut p, &[f64::NAN], &mut s, 0.1), Err(Error::Numeric(_))));
        assert_eq!(s.step_count, 0);
    }

    #[test]
    fn rejects_bad_learning_rate() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        assert!(adam_step(&mut p, &[1.0], &mut s, 0.0).is_err());
    }
}
