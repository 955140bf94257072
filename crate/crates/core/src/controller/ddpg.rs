use serde::{Deserialize, Serialize};

use super::ReplayBuffer;
use crate::envs::EnvSpec;
use crate::error::{dim_check, Error, Result};
use crate::numerics::{adam_step, Activation, AdamState, Mlp, RngStream};

/// Maps an internal task state to the controller's observation vector.
pub type Observer = fn(&[f64]) -> Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpgParams {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    /// Gaussian exploration noise, as a fraction of the action range.
    pub noise_scale: f64,
    /// Real transitions required before training starts.
    pub warmup_size: usize,
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub buffer_capacity: usize,
}

impl Default for DdpgParams {
    fn default() -> Self {
        DdpgParams {
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 64,
            noise_scale: 0.1,
            warmup_size: 64,
            hidden: vec![64, 64],
            hidden_activation: Activation::Tanh,
            buffer_capacity: 100_000,
        }
    }
}

impl DdpgParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch size and buffer capacity must be positive");
        }
        if self.noise_scale.is_nan() || self.noise_scale < 0.0 {
            return bad("noise scale must be non-negative");
        }
        Ok(())
    }
}

/// Which buffer a training mini-batch is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSource {
    Real,
    Cyber,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub real_updates: usize,
    pub cyber_updates: usize,
    pub skipped_real: usize,
    pub skipped_cyber: usize,
    pub mean_critic_loss: f64,
}

/// `y = r + γ·(1 − done)·q_next`
pub fn bellman_target(reward: f64, done: bool, gamma: f64, q_next: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * q_next
    }
}

/// Deterministic actor-critic with delayed target networks.
#[derive(Debug, Clone)]
pub struct DdpgController {
    spec: EnvSpec,
    observer: Observer,
    params: DdpgParams,
    actor: Mlp,
    critic: Mlp,
    target_actor: Mlp,
    target_critic: Mlp,
    actor_opt: AdamState,
    critic_opt: AdamState,
    real_updates: u64,
    cyber_updates: u64,
}

impl DdpgController {
    pub fn new(spec: &EnvSpec, observer: Observer, params: DdpgParams, rng: &mut RngStream) -> Result<Self> {
        params.validate()?;
        let obs_dim = spec.observation_dim;
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend(&params.hidden);
        actor_sizes.push(spec.action_dim);
        let mut critic_sizes = vec![obs_dim + spec.action_dim];
        critic_sizes.extend(&params.hidden);
        critic_sizes.push(1);
        let actor = Mlp::new(&actor_sizes, params.hidden_activation, Activation::Tanh, rng)?;
        let critic = Mlp::new(&critic_sizes, params.hidden_activation, Activation::Identity, rng)?;
        Ok(DdpgController {
            spec: spec.clone(),
            observer,
            actor_opt: AdamState::new(actor.num_params()),
            critic_opt: AdamState::new(critic.num_params()),
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            params,
            real_updates: 0,
            cyber_updates: 0,
        })
    }

    pub fn params(&self) -> &DdpgParams {
        &self.params
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    pub fn target_actor(&self) -> &Mlp {
        &self.target_actor
    }

    pub fn target_critic(&self) -> &Mlp {
        &self.target_critic
    }

    /// Replaces the online networks (targets are synced to them).
    pub fn set_networks(&mut self, actor: Mlp, critic: Mlp) -> Result<()> {
        if !actor.same_architecture(&self.actor) || !critic.same_architecture(&self.critic) {
            return Err(Error::InvalidArgument("network architecture mismatch".into()));
        }
        self.target_actor = actor.clone();
        self.target_critic = critic.clone();
        self.actor = actor;
        self.critic = critic;
        self.actor_opt.reset();
        self.critic_opt.reset();
        Ok(())
    }

    pub fn real_updates(&self) -> u64 {
        self.real_updates
    }

    pub fn cyber_updates(&self) -> u64 {
        self.cyber_updates
    }

    pub fn observe(&self, state: &[f64]) -> Vec<f64> {
        (self.observer)(state)
    }

    fn half_range(&self, d: usize) -> f64 {
        0.5 * (self.spec.action_high[d] - self.spec.action_low[d])
    }

    fn scale_action(&self, squashed: &[f64]) -> Vec<f64> {
        squashed
            .iter()
            .enumerate()
            .map(|(d, &u)| {
                let mid = 0.5 * (self.spec.action_high[d] + self.spec.action_low[d]);
                mid + u * self.half_range(d)
            })
            .collect()
    }

    fn policy_on_obs(net: &Mlp, obs: &[f64]) -> Result<Vec<f64>> {
        net.forward(obs)
    }

    /// Actor output for `state`; with `explore`, Gaussian noise is added
    /// before clipping to the action bounds.
    pub fn act(&self, state: &[f64], explore: bool, rng: &mut RngStream) -> Result<Vec<f64>> {
        dim_check("controller state", self.spec.state_dim, state.len())?;
        let obs = self.observe(state);
        let mut a = self.scale_action(&Self::policy_on_obs(&self.actor, &obs)?);
        if explore {
            for (d, ad) in a.iter_mut().enumerate() {
                *ad += rng.normal() * self.params.noise_scale * 2.0 * self.half_range(d);
            }
        }
        Ok(self.spec.clip_action(&a))
    }

    fn critic_input(obs: &[f64], action: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(obs.len() + action.len());
        x.extend_from_slice(obs);
        x.extend_from_slice(action);
        x
    }

    /// Critic value `Q(state, action)`.
    pub fn q_value(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        dim_check("controller state", self.spec.state_dim, state.len())?;
        dim_check("controller action", self.spec.action_dim, action.len())?;
        let obs = self.observe(state);
        Ok(self.critic.forward(&Self::critic_input(&obs, action))?[0])
    }

    /// `Q(s, π(s))` without exploration.
    pub fn state_value(&self, state: &[f64]) -> Result<f64> {
        let obs = self.observe(state);
        let a = self.scale_action(&Self::policy_on_obs(&self.actor, &obs)?);
        Ok(self.critic.forward(&Self::critic_input(&obs, &a))?[0])
    }

    /// Runs exactly `t_real` real and `t_cyber` synthetic mini-batch updates
    /// in a seeded random interleaving. A source holding fewer than
    /// `batch_size` transitions is skipped and reported.
    pub fn train_mixed(
        &mut self,
        real: &ReplayBuffer,
        cyber: &ReplayBuffer,
        t_real: usize,
        t_cyber: usize,
        rng: &mut RngStream,
    ) -> Result<TrainReport> {
        let mut schedule = vec![BatchSource::Real; t_real];
        schedule.extend(std::iter::repeat_n(BatchSource::Cyber, t_cyber));
        rng.shuffle(&mut schedule);
        let mut report = TrainReport::default();
        let mut loss_sum = 0.0;
        for source in schedule {
            let buffer = match source {
                BatchSource::Real => real,
                BatchSource::Cyber => cyber,
            };
            if buffer.len() < self.params.batch_size {
                match source {
                    BatchSource::Real => report.skipped_real += 1,
                    BatchSource::Cyber => report.skipped_cyber += 1,
                }
                continue;
            }
            let idx = buffer.sample_indices(self.params.batch_size, rng);
            loss_sum += self.update_on(buffer, &idx)?;
            match source {
                BatchSource::Real => {
                    report.real_updates += 1;
                    self.real_updates += 1;
                }
                BatchSource::Cyber => {
                    report.cyber_updates += 1;
                    self.cyber_updates += 1;
                }
            }
        }
        let n = report.real_updates + report.cyber_updates;
        report.mean_critic_loss = if n > 0 { loss_sum / n as f64 } else { 0.0 };
        Ok(report)
    }

    /// One critic regression step, one actor ascent step and a soft target
    /// update on the given batch. Returns the critic loss before the step.
    pub fn update_on(&mut self, buffer: &ReplayBuffer, indices: &[usize]) -> Result<f64> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("empty training batch".into()));
        }
        let inv_b = 1.0 / indices.len() as f64;
        let gamma = self.params.gamma;

        let mut critic_grad = vec![0.0; self.critic.num_params()];
        let mut loss = 0.0;
        let mut observations = Vec::with_capacity(indices.len());
        for &i in indices {
            let t = buffer.get(i);
            let obs = self.observe(&t.state);
            let next_obs = self.observe(&t.next_state);
            let q_next = if t.done {
                0.0
            } else {
                let a_next = self.scale_action(&self.target_actor.forward(&next_obs)?);
                self.target_critic.forward(&Self::critic_input(&next_obs, &a_next))?[0]
            };
            let y = bellman_target(t.reward, t.done, gamma, q_next);
            let trace = self.critic.forward_trace(&Self::critic_input(&obs, &t.action))?;
            let err = trace.output()[0] - y;
            loss += err * err * inv_b;
            self.critic.backward(&trace, &[2.0 * err * inv_b], &mut critic_grad)?;
            observations.push(obs);
        }
        adam_step(self.critic.params_mut(), &critic_grad, &mut self.critic_opt, self.params.critic_lr)?;

        let mut actor_grad = vec![0.0; self.actor.num_params()];
        let mut scratch = vec![0.0; self.critic.num_params()];
        let action_dim = self.spec.action_dim;
        for obs in &observations {
            let a_trace = self.actor.forward_trace(obs)?;
            let action = self.scale_action(a_trace.output());
            let c_trace = self.critic.forward_trace(&Self::critic_input(obs, &action))?;
            // minimise −Q
            let input_grad = self.critic.backward(&c_trace, &[-inv_b], &mut scratch)?;
            let obs_dim = obs.len();
            let squashed_grad: Vec<f64> =
                (0..action_dim).map(|d| input_grad[obs_dim + d] * self.half_range(d)).collect();
            self.actor.backward(&a_trace, &squashed_grad, &mut actor_grad)?;
        }
        adam_step(self.actor.params_mut(), &actor_grad, &mut self.actor_opt, self.params.actor_lr)?;

        let tau = self.params.tau;
        self.target_critic.soft_update_from(&self.critic, tau)?;
        self.target_actor.soft_update_from(&self.actor, tau)?;
        Ok(loss)
    }

    /// Copies every online and target parameter of `src`; optimizer state is
    /// reset.
    pub fn copy_weights_from(&mut self, src: &DdpgController) -> Result<()> {
        if !self.actor.same_architecture(&src.actor) || !self.critic.same_architecture(&src.critic) {
            return Err(Error::InvalidArgument(
                "weight transfer between controllers with different architectures".into(),
            ));
        }
        self.actor.set_params(src.actor.params())?;
        self.critic.set_params(src.critic.params())?;
        self.target_actor.set_params(src.target_actor.params())?;
        self.target_critic.set_params(src.target_critic.params())?;
        self.actor_opt.reset();
        self.critic_opt.reset();
        Ok(())
    }

    /// True when all online and target parameters are bitwise equal.
    pub fn same_weights(&self, other: &DdpgController) -> bool {
        self.actor.params() == other.actor.params()
            && self.critic.params() == other.critic.params()
            && self.target_actor.params() == other.target_actor.params()
            && self.target_critic.params() == other.target_critic.params()
    }
}
