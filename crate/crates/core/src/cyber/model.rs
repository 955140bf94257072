use serde::{Deserialize, Serialize};

use super::Normalizer;
use crate::envs::{EnvSpec, Transition};
use crate::error::{dim_check, Error, Result};
use crate::numerics::{adam_step, Activation, AdamState, Mlp, RngStream};

/// Architecture and refit schedule of the dynamics model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Upper bound on mini-batches per epoch; `None` means a full pass.
    pub max_batches_per_epoch: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: vec![64],
            activation: Activation::Tanh,
            epochs: 5,
            batch_size: 64,
            learning_rate: 1e-3,
            max_batches_per_epoch: None,
        }
    }
}

/// Neural network predicting normalized state deltas from normalized
/// `state ⊕ action`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsModel {
    spec: EnvSpec,
    config: ModelConfig,
    net: Mlp,
    optimizer: AdamState,
    input_normalizer: Normalizer,
    delta_normalizer: Normalizer,
}

impl DynamicsModel {
    pub fn new(spec: &EnvSpec, config: ModelConfig, rng: &mut RngStream) -> Result<Self> {
        let mut sizes = vec![spec.state_dim + spec.action_dim];
        sizes.extend(&config.hidden);
        sizes.push(spec.state_dim);
        let net = Mlp::new(&sizes, config.activation, Activation::Identity, rng)?;
        Ok(Self::with_net(spec, config, net))
    }

    fn with_net(spec: &EnvSpec, config: ModelConfig, net: Mlp) -> Self {
        DynamicsModel {
            spec: spec.clone(),
            optimizer: AdamState::new(net.num_params()),
            input_normalizer: Normalizer::new(spec.state_dim + spec.action_dim),
            delta_normalizer: Normalizer::new(spec.state_dim),
            config,
            net,
        }
    }

    /// Replaces the network; shapes must match the environment dimensions.
    pub fn set_net(&mut self, net: Mlp) -> Result<()> {
        dim_check("model input", self.spec.state_dim + self.spec.action_dim, net.input_size())?;
        dim_check("model output", self.spec.state_dim, net.output_size())?;
        self.optimizer = AdamState::new(net.num_params());
        self.net = net;
        Ok(())
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn input_normalizer(&self) -> &Normalizer {
        &self.input_normalizer
    }

    pub fn delta_normalizer(&self) -> &Normalizer {
        &self.delta_normalizer
    }

    pub fn is_ready(&self) -> bool {
        self.input_normalizer.is_ready() && self.delta_normalizer.is_ready()
    }

    /// `next − state`, with periodic dimensions taken along the short arc.
    pub fn state_delta(&self, state: &[f64], next: &[f64]) -> Vec<f64> {
        state
            .iter()
            .zip(next)
            .enumerate()
            .map(|(i, (&s, &n))| {
                let d = n - s;
                if self.spec.periodic[i] {
                    let period = self.spec.state_high[i] - self.spec.state_low[i];
                    (d + 0.5 * period).rem_euclid(period) - 0.5 * period
                } else {
                    d
                }
            })
            .collect()
    }

    fn model_input(state: &[f64], action: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(state.len() + action.len());
        x.extend_from_slice(state);
        x.extend_from_slice(action);
        x
    }

    /// Refits on `data` with the configured schedule.
    pub fn refit(&mut self, data: &[Transition], rng: &mut RngStream) -> Result<Vec<f64>> {
        let c = self.config.clone();
        self.fit(data, c.epochs, c.batch_size, c.learning_rate, rng)
    }

    /// Minimizes mean squared error on normalized deltas. Normalizer
    /// statistics are recomputed from `data` first. Returns the mean loss of
    /// every epoch.
    pub fn fit(
        &mut self,
        data: &[Transition],
        epochs: usize,
        batch_size: usize,
        learning_rate: f64,
        rng: &mut RngStream,
    ) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::InvalidArgument("cannot fit dynamics model on empty data".into()));
        }
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        let inputs: Vec<Vec<f64>> = data.iter().map(|t| Self::model_input(&t.state, &t.action)).collect();
        let deltas: Vec<Vec<f64>> = data.iter().map(|t| self.state_delta(&t.state, &t.next_state)).collect();
        self.input_normalizer.clear();
        self.delta_normalizer.clear();
        self.input_normalizer.update(inputs.iter().map(|v| v.as_slice()))?;
        self.delta_normalizer.update(deltas.iter().map(|v| v.as_slice()))?;

        let xs: Vec<Vec<f64>> = inputs.iter().map(|x| self.input_normalizer.normalize(x)).collect();
        let ys: Vec<Vec<f64>> = deltas.iter().map(|y| self.delta_normalizer.normalize(y)).collect();

        let out_dim = self.spec.state_dim;
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut grads = vec![0.0; self.net.num_params()];
        let mut trace = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            rng.shuffle(&mut order);
            let mut batches = order.chunks(batch_size).collect::<Vec<_>>();
            if let Some(cap) = self.config.max_batches_per_epoch {
                batches.truncate(cap.max(1));
            }
            let mut epoch_loss = 0.0;
            for batch in &batches {
                grads.iter_mut().for_each(|g| *g = 0.0);
                let scale = 1.0 / (batch.len() * out_dim) as f64;
                let mut batch_loss = 0.0;
                for &i in batch.iter() {
                    let t = self.net.forward_trace(&xs[i])?;
                    let err: Vec<f64> = t.output().iter().zip(&ys[i]).map(|(p, y)| p - y).collect();
                    batch_loss += err.iter().map(|e| e * e).sum::<f64>();
                    let g_out: Vec<f64> = err.iter().map(|e| 2.0 * e * scale).collect();
                    self.net.backward(&t, &g_out, &mut grads)?;
                }
                adam_step(self.net.params_mut(), &grads, &mut self.optimizer, learning_rate)?;
                epoch_loss += batch_loss * scale;
            }
            trace.push(epoch_loss / batches.len() as f64);
        }
        Ok(trace)
    }

    /// `state + delta(state, action)`, projected back into the state box.
    pub fn predict_next(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        dim_check("model state", self.spec.state_dim, state.len())?;
        dim_check("model action", self.spec.action_dim, action.len())?;
        if !self.is_ready() {
            return Err(Error::State("dynamics model normalizers are not initialized (fit first)".into()));
        }
        let x = self.input_normalizer.normalize(&Self::model_input(state, action));
        let z = self.net.forward(&x)?;
        let delta = self.delta_normalizer.denormalize(&z);
        let mut next: Vec<f64> = state.iter().zip(&delta).map(|(s, d)| s + d).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("dynamics model produced a non-finite state".into()));
        }
        self.spec.project_state(&mut next);
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::Task;

    fn linear_spec() -> EnvSpec {
        EnvSpec {
            state_dim: 2,
            observation_dim: 2,
            action_dim: 1,
            action_low: vec![-1.0],
            action_high: vec![1.0],
            state_low: vec![-1.0, -1.0],
            state_high: vec![1.0, 1.0],
            periodic: vec![false, false],
            max_episode_steps: 50,
        }
    }

    fn transitions(n: usize, rng: &mut RngStream, f: impl Fn(&[f64], f64) -> Vec<f64>) -> Vec<Transition> {
        (0..n)
            .map(|_| {
                let s = vec![rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0)];
                let a = rng.uniform_range(-1.0, 1.0);
                Transition { next_state: f(&s, a), state: s, action: vec![a], reward: 0.0, done: false }
            })
            .collect()
    }

    #[test]
    fn zero_net_predicts_identity() {
        let spec = linear_spec();
        let mut rng = RngStream::new(0);
        let mut model = DynamicsModel::new(&spec, ModelConfig::default(), &mut rng).unwrap();
        let data = transitions(10, &mut rng, |s, a| vec![0.9 * s[0] + 0.1 * a, 0.9 * s[1] + 0.1 * a]);
        model.fit(&data, 0, 8, 1e-3, &mut rng).unwrap();
        let zero = Mlp::zeros(model.net().layer_sizes(), Activation::Tanh, Activation::Identity).unwrap();
        model.set_net(zero).unwrap();
        // zero output denormalizes to the mean delta; clear that for the check
        model.delta_normalizer = Normalizer::new(2);
        model.delta_normalizer.push(&[0.0, 0.0]).unwrap();
        model.delta_normalizer.push(&[0.0, 0.0]).unwrap();
        let s = [0.3, -0.4];
        assert_eq!(model.predict_next(&s, &[0.5]).unwrap(), s.to_vec());
    }

    #[test]
    fn zero_epochs_leave_parameters_unchanged() {
        let spec = linear_spec();
        let mut rng = RngStream::new(1);
        let mut model = DynamicsModel::new(&spec, ModelConfig::default(), &mut rng).unwrap();
        let before = model.net().params().to_vec();
        let data = transitions(20, &mut rng, |s, _| s.to_vec());
        let trace = model.fit(&data, 0, 8, 1e-3, &mut rng).unwrap();
        assert!(trace.is_empty());
        assert_eq!(model.net().params(), before.as_slice());
    }

    #[test]
    fn empty_data_is_rejected() {
        let spec = linear_spec();
        let mut rng = RngStream::new(1);
        let mut model = DynamicsModel::new(&spec, ModelConfig::default(), &mut rng).unwrap();
        assert!(matches!(model.fit(&[], 1, 8, 1e-3, &mut rng), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn unfitted_model_cannot_predict() {
        let spec = linear_spec();
        let model = DynamicsModel::new(&spec, ModelConfig::default(), &mut RngStream::new(0)).unwrap();
        assert!(matches!(model.predict_next(&[0.0, 0.0], &[0.0]), Err(Error::State(_))));
    }

    #[test]
    fn identity_dynamics_learn_near_zero_delta() {
        let spec = linear_spec();
        let mut rng = RngStream::new(3);
        let mut model = DynamicsModel::new(&spec, ModelConfig::default(), &mut rng).unwrap();
        let data = transitions(500, &mut rng, |s, _| s.to_vec());
        model.fit(&data, 60, 32, 5e-3, &mut rng).unwrap();
        for t in transitions(50, &mut rng, |s, _| s.to_vec()) {
            let p = model.predict_next(&t.state, &t.action).unwrap();
            for (pi, si) in p.iter().zip(&t.state) {
                assert!((pi - si).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn predictions_stay_in_box() {
        let spec = Task::MountainCar.spec();
        let mut rng = RngStream::new(4);
        let mut model = DynamicsModel::new(&spec, ModelConfig::default(), &mut rng).unwrap();
        let data: Vec<Transition> = (0..50)
            .map(|_| {
                let s = spec.sample_state_uniform(&mut rng).unwrap();
                Transition {
                    next_state: vec![s[0] + 0.5, s[1] + 0.05],
                    state: s,
                    action: vec![rng.uniform_range(-1.0, 1.0)],
                    reward: 0.0,
                    done: false,
                }
            })
            .collect();
        model.fit(&data, 3, 16, 1e-2, &mut rng).unwrap();
        for _ in 0..200 {
            let s = spec.sample_state_uniform(&mut rng).unwrap();
            let p = model.predict_next(&s, &[rng.uniform_range(-1.0, 1.0)]).unwrap();
            assert!(spec.contains_state(&p));
        }
    }

    #[test]
    fn periodic_delta_takes_short_arc() {
        let spec = Task::Pendulum.spec();
        let model = DynamicsModel::new(&spec, ModelConfig::default(), &mut RngStream::new(0)).unwrap();
        let pi = std::f64::consts::PI;
        let d = model.state_delta(&[pi - 0.05, 0.0], &[-pi + 0.05, 0.0]);
        assert!((d[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn fitting_is_deterministic() {
        let spec = linear_spec();
        let run = || {
            let mut rng = RngStream::new(9);
            let mut model = DynamicsModel::new(&spec, ModelConfig::default(), &mut rng).unwrap();
            let data = transitions(100, &mut rng, |s, a| vec![s[1], a]);
            let trace = model.fit(&data, 3, 16, 1e-3, &mut rng).unwrap();
            (trace, model.net().params().to_vec())
        };
        assert_eq!(run(), run());
    }
}
