//! Training Process Environment: one model-based training step of the
//! target controller exposed through observation, action and reward.

mod formulas;
mod reset;
mod runner;

pub use formulas::{compute_kc, compute_tc, quality_from_parts, reward_sign};
pub use reset::{quality, sampling_reset_cyber, sampling_reset_real, select_start_state, CyberStart};
pub use runner::{ActorChoice, RealSampleReport, Tpe, TpeStepReport};

use serde::{Deserialize, Serialize};

use crate::controller::DdpgParams;
use crate::cyber::ModelConfig;
use crate::error::{Error, Result};

/// The three knobs a trainer turns: where real episodes start (`a0`), where
/// synthetic episodes start (`a1`) and the real/synthetic data ratio (`a2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpeAction {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl TpeAction {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Result<Self> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(a0) || !unit(a1) {
            return Err(Error::InvalidArgument(format!("a0 and a1 must lie in [0, 1], got ({a0}, {a1})")));
        }
        if !(a2 > 0.0 && a2 <= 1.0) {
            return Err(Error::InvalidArgument(format!("a2 must lie in (0, 1], got {a2}")));
        }
        Ok(TpeAction { a0, a1, a2 })
    }

    /// Real data only: no synthetic samples and no synthetic batches.
    pub fn all_real() -> Self {
        TpeAction { a0: 0.0, a1: 0.0, a2: 1.0 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a0, self.a1, self.a2]
    }
}

/// What the TPE reports as its state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TpeObsMode {
    /// Always 0.
    Constant,
    /// Mean per-step reward of the latest real samples.
    LastAvgReward,
    /// Fraction of the real-sample budget used so far.
    SampleRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpeConfig {
    /// Real samples per step.
    pub k_real: usize,
    /// Real mini-batches per step.
    pub t_real: usize,
    /// Maximum real samples.
    pub budget_n: usize,
    /// Random-action real samples collected at initialization.
    pub init_samples: usize,
    /// Maximum start-state trials.
    pub m1: usize,
    /// Minimum start-state trials.
    pub m2: usize,
    pub obs_mode: TpeObsMode,
    pub model: ModelConfig,
    pub ddpg: DdpgParams,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig {
            k_real: 50,
            t_real: 50,
            budget_n: 50_000,
            init_samples: 500,
            m1: 50,
            m2: 5,
            obs_mode: TpeObsMode::Constant,
            model: ModelConfig::default(),
            ddpg: DdpgParams::default(),
        }
    }
}

impl TpeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.m1 > self.m2 && self.m2 > 0) {
            return bad(format!("need m1 > m2 > 0, got m1={} m2={}", self.m1, self.m2));
        }
        if self.k_real == 0 {
            return bad("k_real must be at least 1".into());
        }
        if self.init_samples > self.budget_n {
            return bad(format!("init_samples ({}) exceeds budget ({})", self.init_samples, self.budget_n));
        }
        self.ddpg.validate()
    }
}
