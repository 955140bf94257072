use serde::{Deserialize, Serialize};

use super::capped::{CappedReplay, TrainerSample};
use super::ActionTable;
use crate::error::{Error, Result};
use crate::numerics::{adam_step, Activation, AdamState, Mlp, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    pub memory: usize,
    pub hidden: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batches_per_update: usize,
    pub batch_size: usize,
    pub epsilon_start: f64,
    pub epsilon_final: f64,
    /// Fraction of `total_steps` over which epsilon anneals.
    pub anneal_fraction: f64,
    /// Planned number of trainer steps.
    pub total_steps: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            memory: 32,
            hidden: 16,
            gamma: 0.5,
            learning_rate: 0.01,
            batches_per_update: 4,
            batch_size: 8,
            epsilon_start: 1.0,
            epsilon_final: 0.1,
            anneal_fraction: 0.1,
            total_steps: 1000,
        }
    }
}

/// Linear schedule from `start` at `t = 0` to `final_` at
/// `t = fraction · t_max`, constant afterwards.
pub fn epsilon_at(t: usize, t_max: usize, start: f64, final_: f64, fraction: f64) -> f64 {
    let horizon = fraction * t_max as f64;
    if horizon <= 0.0 || t as f64 >= horizon {
        return final_;
    }
    start + (final_ - start) * (t as f64 / horizon)
}

/// Epsilon-greedy DQN over an action table, with a small Q-network fed the
/// scalar TPE observation and a per-action capped memory.
#[derive(Debug, Clone)]
pub struct DqnTrainer {
    table: ActionTable,
    config: DqnConfig,
    q_net: Mlp,
    optimizer: AdamState,
    memory: CappedReplay,
    updates: usize,
}

impl DqnTrainer {
    pub fn new(table: ActionTable, config: DqnConfig, rng: &mut RngStream) -> Result<Self> {
        if config.batch_size == 0 || config.hidden == 0 || !(0.0..1.0).contains(&config.gamma) {
            return Err(Error::InvalidArgument("invalid DQN trainer configuration".into()));
        }
        let q_net = Mlp::new(&[1, config.hidden, table.len()], Activation::Tanh, Activation::Identity, rng)?;
        let memory = CappedReplay::new(config.memory, table.len())?;
        Ok(DqnTrainer { optimizer: AdamState::new(q_net.num_params()), table, config, q_net, memory, updates: 0 })
    }

    pub fn table(&self) -> &ActionTable {
        &self.table
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn memory(&self) -> &CappedReplay {
        &self.memory
    }

    pub fn q_net(&self) -> &Mlp {
        &self.q_net
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn epsilon(&self, t: usize) -> f64 {
        let c = &self.config;
        epsilon_at(t, c.total_steps, c.epsilon_start, c.epsilon_final, c.anneal_fraction)
    }

    pub fn q_values(&self, obs: f64) -> Result<Vec<f64>> {
        self.q_net.forward(&[obs])
    }

    pub fn greedy_action(&self, obs: f64) -> Result<usize> {
        Ok(argmax(&self.q_values(obs)?))
    }

    pub fn select_action(&self, obs: f64, t: usize, rng: &mut RngStream) -> Result<usize> {
        if rng.uniform() < self.epsilon(t) {
            Ok(rng.index(self.table.len()))
        } else {
            self.greedy_action(obs)
        }
    }

    pub fn store(&mut self, sample: TrainerSample, rng: &mut RngStream) -> Result<()> {
        self.memory.store(sample, rng)
    }

    /// Runs the configured number of minibatch steps toward
    /// `r + γ · max_a Q(next_obs, a)`. Returns the mean loss, or `None` when
    /// the memory is empty.
    pub fn update(&mut self, rng: &mut RngStream) -> Result<Option<f64>> {
        if self.memory.is_empty() {
            return Ok(None);
        }
        let mut total_loss = 0.0;
        for _ in 0..self.config.batches_per_update {
            let batch = self.memory.sample(self.config.batch_size, rng);
            let mut grads = vec![0.0; self.q_net.num_params()];
            let scale = 1.0 / batch.len() as f64;
            for s in &batch {
                let next_max = self.q_net.forward(&[s.next_obs])?.into_iter().fold(f64::NEG_INFINITY, f64::max);
                let target = s.reward + self.config.gamma * next_max;
                let trace = self.q_net.forward_trace(&[s.obs])?;
                let err = trace.output()[s.action] - target;
                total_loss += 0.5 * err * err * scale;
                let mut out_grad = vec![0.0; self.table.len()];
                out_grad[s.action] = err * scale;
                self.q_net.backward(&trace, &out_grad, &mut grads)?;
            }
            adam_step(self.q_net.params_mut(), &grads, &mut self.optimizer, self.config.learning_rate)?;
        }
        self.updates += 1;
        Ok(Some(total_loss / self.config.batches_per_update as f64))
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trainer(seed: u64) -> DqnTrainer {
        let cfg = DqnConfig { total_steps: 300, ..DqnConfig::default() };
        DqnTrainer::new(ActionTable::two_level(), cfg, &mut RngStream::new(seed)).unwrap()
    }

    #[test]
    fn schedule_points() {
        assert_eq!(epsilon_at(0, 1000, 1.0, 0.1, 0.1), 1.0);
        assert!((epsilon_at(50, 1000, 1.0, 0.1, 0.1) - 0.55).abs() < 1e-9);
        assert_eq!(epsilon_at(100, 1000, 1.0, 0.1, 0.1), 0.1);
        assert_eq!(epsilon_at(5000, 1000, 1.0, 0.1, 0.1), 0.1);
        assert_eq!(epsilon_at(0, 0, 1.0, 0.1, 0.1), 0.1);
    }

    #[test]
    fn schedule_is_monotone_and_bounded() {
        let mut prev = f64::INFINITY;
        for t in 0..500 {
            let e = epsilon_at(t, 400, 1.0, 0.1, 0.1);
            assert!((0.1..=1.0).contains(&e));
            assert!(e <= prev);
            prev = e;
        }
    }

    #[test]
    fn greedy_after_anneal_follows_q_values() {
        let mut t = trainer(0);
        let n = t.q_net.num_params();
        let mut p = vec![0.0; n];
        // Output bias of action 1 set high; every other parameter zero.
        p[n - 8 + 1] = 0.9;
        p[n - 8] = 0.1;
        t.q_net.set_params(&p).unwrap();
        let mut rng = RngStream::new(9);
        let mut greedy = 0;
        for _ in 0..1000 {
            if t.select_action(0.0, 30, &mut rng).unwrap() == 1 {
                greedy += 1;
            }
        }
        assert!(greedy > 880, "{greedy}");
        assert_eq!(t.greedy_action(0.0).unwrap(), 1);
    }

    #[test]
    fn empty_memory_update_is_noop() {
        let mut t = trainer(1);
        let before = t.q_net.params().to_vec();
        assert_eq!(t.update(&mut RngStream::new(0)).unwrap(), None);
        assert_eq!(t.q_net.params(), &before[..]);
        assert_eq!(t.updates(), 0);
    }

    #[test]
    fn zero_rewards_drive_q_to_zero() {
        let mut t = trainer(2);
        let mut rng = RngStream::new(2);
        for a in 0..8 {
            t.store(TrainerSample { obs: 0.0, action: a, reward: 0.0, next_obs: 0.0 }, &mut rng).unwrap();
        }
        let start = t.q_values(0.0).unwrap().iter().map(|v| v.abs()).fold(0.0, f64::max);
        for _ in 0..400 {
            t.update(&mut rng).unwrap();
        }
        let end = t.q_values(0.0).unwrap().iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(end < 0.05 && end < start, "{start} -> {end}");
    }

    #[test]
    fn update_is_reproducible() {
        let run = || {
            let mut t = trainer(3);
            let mut rng = RngStream::new(3);
            for a in 0..8 {
                let s = TrainerSample { obs: 0.5, action: a, reward: a as f64, next_obs: 0.5 };
                t.store(s, &mut rng).unwrap();
            }
            for _ in 0..5 {
                t.update(&mut rng).unwrap();
            }
            t.q_net.params().to_vec()
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
