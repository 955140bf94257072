use serde::{Deserialize, Serialize};

use super::ActionTable;
use crate::error::{Error, Result};
use crate::numerics::{Activation, Mlp, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReinforceConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub episode_length: usize,
}

impl Default for ReinforceConfig {
    fn default() -> Self {
        ReinforceConfig { hidden: 16, learning_rate: 0.01, episode_length: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReinforceStep {
    pub obs: f64,
    pub action: usize,
    pub reward: f64,
}

/// Softmax policy over an action table trained by plain policy-gradient
/// ascent on fixed-length episodes of TPE steps.
#[derive(Debug, Clone)]
pub struct ReinforceTrainer {
    table: ActionTable,
    config: ReinforceConfig,
    policy: Mlp,
    episode: Vec<ReinforceStep>,
}

impl ReinforceTrainer {
    pub fn new(table: ActionTable, config: ReinforceConfig, rng: &mut RngStream) -> Result<Self> {
        if config.episode_length == 0 || config.hidden == 0 || config.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("invalid REINFORCE configuration".into()));
        }
        let policy = Mlp::new(&[1, config.hidden, table.len()], Activation::Tanh, Activation::Identity, rng)?;
        Ok(ReinforceTrainer { table, config, policy, episode: Vec::new() })
    }

    pub fn table(&self) -> &ActionTable {
        &self.table
    }

    pub fn policy(&self) -> &Mlp {
        &self.policy
    }

    pub fn pending(&self) -> &[ReinforceStep] {
        &self.episode
    }

    pub fn probabilities(&self, obs: f64) -> Result<Vec<f64>> {
        Ok(softmax(&self.policy.forward(&[obs])?))
    }

    pub fn select_action(&self, obs: f64, rng: &mut RngStream) -> Result<usize> {
        let probs = self.probabilities(obs)?;
        let u = rng.uniform();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
        Ok(probs.len() - 1)
    }

    /// Appends one step; a full episode triggers an update.
    pub fn record(&mut self, obs: f64, action: usize, reward: f64) -> Result<()> {
        if action >= self.table.len() {
            return Err(Error::InvalidArgument(format!("action index {action} out of range")));
        }
        self.episode.push(ReinforceStep { obs, action, reward });
        if self.episode.len() == self.config.episode_length {
            let episode = std::mem::take(&mut self.episode);
            self.update(&episode)?;
        }
        Ok(())
    }

    /// One ascent step on `G · Σ log π(a_t | o_t)` where `G` is the episode
    /// return.
    pub fn update(&mut self, episode: &[ReinforceStep]) -> Result<()> {
        if episode.len() != self.config.episode_length {
            return Err(Error::InvalidArgument(format!(
                "episode must have {} steps, got {}",
                self.config.episode_length,
                episode.len()
            )));
        }
        let ret: f64 = episode.iter().map(|s| s.reward).sum();
        let mut grads = vec![0.0; self.policy.num_params()];
        for s in episode {
            let trace = self.policy.forward_trace(&[s.obs])?;
            let probs = softmax(trace.output());
            let out_grad: Vec<f64> =
                probs.iter().enumerate().map(|(i, p)| ret * (f64::from(i == s.action) - p)).collect();
            self.policy.backward(&trace, &out_grad, &mut grads)?;
        }
        crate::error::finite_check("policy gradient", &grads)?;
        let lr = self.config.learning_rate;
        for (p, g) in self.policy.params_mut().iter_mut().zip(&grads) {
            *p += lr * g;
        }
        Ok(())
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trainer(seed: u64) -> ReinforceTrainer {
        ReinforceTrainer::new(ActionTable::two_level(), ReinforceConfig::default(), &mut RngStream::new(seed)).unwrap()
    }

    fn episode(action: usize, reward: f64) -> Vec<ReinforceStep> {
        vec![ReinforceStep { obs: 0.0, action, reward }; 5]
    }

    #[test]
    fn zero_return_leaves_parameters() {
        let mut t = trainer(0);
        let before = t.policy.params().to_vec();
        t.update(&episode(2, 0.0)).unwrap();
        assert_eq!(t.policy.params(), &before[..]);
    }

    #[test]
    fn wrong_length_rejected() {
        let mut t = trainer(0);
        assert!(matches!(t.update(&episode(2, 1.0)[..4]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rewarded_action_gains_probability() {
        let mut t = trainer(1);
        let mut prev = t.probabilities(0.0).unwrap()[6];
        for _ in 0..50 {
            t.update(&episode(6, 1.0)).unwrap();
            let p = t.probabilities(0.0).unwrap()[6];
            assert!(p > prev);
            prev = p;
        }
    }

    #[test]
    fn record_triggers_update_every_five_steps() {
        let mut t = trainer(2);
        let before = t.policy.params().to_vec();
        for k in 0..4 {
            t.record(0.0, 1, 1.0).unwrap();
            assert_eq!(t.pending().len(), k + 1);
        }
        assert_eq!(t.policy.params(), &before[..]);
        t.record(0.0, 1, 1.0).unwrap();
        assert!(t.pending().is_empty());
        assert_ne!(t.policy.params(), &before[..]);
    }

    #[test]
    fn sampling_follows_probabilities() {
        let t = trainer(3);
        let probs = t.probabilities(0.3).unwrap();
        let mut counts = [0usize; 8];
        let mut rng = RngStream::new(4);
        let n = 20_000;
        for _ in 0..n {
            counts[t.select_action(0.3, &mut rng).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.015);
        }
    }
}
