//! Outer agents that choose TPE actions.

mod baseline;
mod capped;
mod dqn;
mod reinforce;

pub use baseline::{BaselineKind, BaselineTrainer};
pub use capped::{CappedReplay, TrainerSample};
pub use dqn::{epsilon_at, DqnConfig, DqnTrainer};
pub use reinforce::{ReinforceConfig, ReinforceStep, ReinforceTrainer};

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::tpe::TpeAction;

/// Cartesian product of per-dimension value sets, flattened with `a2`
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable {
    levels: [Vec<f64>; 3],
    actions: Vec<TpeAction>,
}

impl ActionTable {
    pub fn new(levels: [Vec<f64>; 3]) -> Result<Self> {
        if levels.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidArgument("every dimension needs at least one value".into()));
        }
        let mut actions = Vec::with_capacity(levels.iter().map(Vec::len).product());
        for &a0 in &levels[0] {
            for &a1 in &levels[1] {
                for &a2 in &levels[2] {
                    actions.push(TpeAction::new(a0, a1, a2)?);
                }
            }
        }
        Ok(ActionTable { levels, actions })
    }

    /// `{0.2, 1.0}` per dimension, 8 actions.
    pub fn two_level() -> Self {
        let l = vec![0.2, 1.0];
        ActionTable::new([l.clone(), l.clone(), l]).expect("valid levels")
    }

    /// `{0.2, 0.4, 0.6, 0.8, 1.0}` per dimension, 125 actions.
    pub fn five_level() -> Self {
        let l = vec![0.2, 0.4, 0.6, 0.8, 1.0];
        ActionTable::new([l.clone(), l.clone(), l]).expect("valid levels")
    }

    pub fn levels(&self) -> &[Vec<f64>; 3] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<TpeAction> {
        self.actions.get(index).copied()
    }

    pub fn actions(&self) -> &[TpeAction] {
        &self.actions
    }

    /// Index of the entry closest (Euclidean) to `action`; first wins on ties.
    pub fn nearest(&self, action: &TpeAction) -> usize {
        let target = action.as_array();
        let dist = |a: &TpeAction| a.as_array().iter().zip(&target).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        let mut best = 0;
        for (i, a) in self.actions.iter().enumerate() {
            if dist(a) < dist(&self.actions[best]) {
                best = i;
            }
        }
        best
    }
}

/// An emitted action and, for table-based trainers, its index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub index: Option<usize>,
    pub action: TpeAction,
}

pub enum Trainer {
    Dqn(DqnTrainer),
    Reinforce(ReinforceTrainer),
    Baseline(BaselineTrainer),
}

impl Trainer {
    pub fn name(&self) -> &'static str {
        match self {
            Trainer::Dqn(_) => "dqn",
            Trainer::Reinforce(_) => "reinforce",
            Trainer::Baseline(b) => b.kind().name(),
        }
    }

    /// Picks the action for trainer step `t`.
    pub fn select(&mut self, obs: f64, t: usize, rng: &mut RngStream) -> Result<Choice> {
        match self {
            Trainer::Dqn(d) => {
                let i = d.select_action(obs, t, rng)?;
                Ok(Choice { index: Some(i), action: d.table().actions()[i] })
            }
            Trainer::Reinforce(r) => {
                let i = r.select_action(obs, rng)?;
                Ok(Choice { index: Some(i), action: r.table().actions()[i] })
            }
            Trainer::Baseline(b) => Ok(b.select(rng)),
        }
    }

    /// Feeds back the outcome of the last action.
    pub fn observe(&mut self, obs: f64, choice: Choice, reward: f64, next_obs: f64, rng: &mut RngStream) -> Result<()> {
        match (self, choice.index) {
            (Trainer::Dqn(d), Some(action)) => {
                d.store(TrainerSample { obs, action, reward, next_obs }, rng)?;
                d.update(rng)?;
                Ok(())
            }
            (Trainer::Reinforce(r), Some(action)) => r.record(obs, action, reward),
            (Trainer::Baseline(_), _) => Ok(()),
            _ => Err(Error::InvalidArgument("table trainer needs an action index".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes() {
        assert_eq!(ActionTable::two_level().len(), 8);
        assert_eq!(ActionTable::five_level().len(), 125);
        let t = ActionTable::new([vec![0.0], vec![0.5, 1.0], vec![0.2, 0.6, 1.0]]).unwrap();
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn table_rejects_zero_ratio() {
        assert!(ActionTable::new([vec![0.2], vec![0.2], vec![0.0, 1.0]]).is_err());
        assert!(ActionTable::new([vec![], vec![0.2], vec![1.0]]).is_err());
    }

    #[test]
    fn table_order_and_nearest() {
        let t = ActionTable::two_level();
        assert_eq!(t.get(0), Some(TpeAction::new(0.2, 0.2, 0.2).unwrap()));
        assert_eq!(t.get(1), Some(TpeAction::new(0.2, 0.2, 1.0).unwrap()));
        assert_eq!(t.get(7), Some(TpeAction::new(1.0, 1.0, 1.0).unwrap()));
        for (i, a) in t.actions().iter().enumerate() {
            assert_eq!(t.nearest(a), i);
        }
        assert_eq!(t.nearest(&TpeAction::all_real()), 1);
    }
}
