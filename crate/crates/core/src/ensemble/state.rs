use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of trainer slots.
pub const SLOTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Analysis runs once more than this many steps have passed.
    pub transfer_threshold: usize,
    pub phi_max: f64,
    pub phi_min: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { transfer_threshold: 3, phi_max: 0.7, phi_min: 0.5 }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.phi_min.is_finite() || !self.phi_max.is_finite() || self.phi_max <= self.phi_min {
            return Err(Error::InvalidArgument(format!(
                "phi_max ({}) must exceed phi_min ({})",
                self.phi_max, self.phi_min
            )));
        }
        Ok(())
    }
}

/// Probability of acting with the best slot's controller at trainer step
/// `t`. Every third step is forced to zero.
pub fn reference_probability(t: usize, phi: f64, phi_min: f64, phi_max: f64) -> f64 {
    if t.is_multiple_of(3) {
        return 0.0;
    }
    ((phi - phi_min) / (phi_max - phi_min)).clamp(0.0, 1.0)
}

/// Position of each value in the ascending sort; tied values share the
/// lowest position.
pub fn order_rewards(raw: [f64; SLOTS]) -> [u8; SLOTS] {
    let mut ranks = [0u8; SLOTS];
    for (i, r) in ranks.iter_mut().enumerate() {
        *r = raw.iter().filter(|&&other| other < raw[i]).count() as u8;
    }
    ranks
}

/// Per-slot sum of rank rewards over `history`.
pub fn accumulate(history: &[[u8; SLOTS]]) -> [f64; SLOTS] {
    let mut sums = [0.0; SLOTS];
    for ranks in history {
        for (s, &r) in sums.iter_mut().zip(ranks) {
            *s += f64::from(r);
        }
    }
    sums
}

/// `(R_best − R_median) / (R_best − R_worst)`, or `phi_min` when all
/// accumulated rewards are equal.
pub fn skewness(accumulated: [f64; SLOTS], phi_min: f64) -> f64 {
    let mut sorted = accumulated;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (worst, median, best) = (sorted[0], sorted[1], sorted[2]);
    if best == worst {
        phi_min
    } else {
        (best - median) / (best - worst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub accumulated: [f64; SLOTS],
    pub best_index: usize,
    pub phi: f64,
    /// Slot whose controller is copied into slot 0.
    pub transfer_from: Option<usize>,
}

/// What happened to the bookkeeping during one ensemble step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub p_ref: f64,
    /// True when the step's raw rewards were ranked (`p_ref = 0`).
    pub evaluated: bool,
    pub ranks: [u8; SLOTS],
    pub analysis: Option<Analysis>,
}

/// Rank history, skewness and reference-probability bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleState {
    config: EnsembleConfig,
    t: usize,
    history: Vec<[u8; SLOTS]>,
    last_ranks: [u8; SLOTS],
    best_index: usize,
    phi: f64,
}

impl EnsembleState {
    pub fn new(config: EnsembleConfig) -> Result<Self> {
        config.validate()?;
        Ok(EnsembleState {
            t: 0,
            history: Vec::new(),
            last_ranks: [0; SLOTS],
            best_index: 2,
            phi: config.phi_min,
            config,
        })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Steps since the last analysis.
    pub fn n_c(&self) -> usize {
        self.history.len()
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Overrides the current skewness ratio.
    pub fn set_phi(&mut self, phi: f64) {
        self.phi = phi;
    }

    pub fn history(&self) -> &[[u8; SLOTS]] {
        &self.history
    }

    /// `p_ref` for the step about to run.
    pub fn current_p_ref(&self) -> f64 {
        reference_probability(self.t, self.phi, self.config.phi_min, self.config.phi_max)
    }

    /// Closes a step given each slot's raw average sampling reward. Ranks
    /// are recomputed only on steps with `p_ref = 0`; other steps repeat the
    /// latest ranks.
    pub fn finish_step(&mut self, raw: [f64; SLOTS]) -> Result<StepRecord> {
        let p_ref = self.current_p_ref();
        let evaluated = p_ref == 0.0;
        if evaluated {
            crate::error::finite_check("slot rewards", &raw)?;
            self.last_ranks = order_rewards(raw);
        }
        let record_t = self.t;
        self.history.push(self.last_ranks);
        self.t += 1;
        let analysis = self.skewness_analysis();
        Ok(StepRecord { t: record_t, p_ref, evaluated, ranks: self.last_ranks, analysis })
    }

    /// Runs when more than `transfer_threshold` steps have accumulated:
    /// picks the best slot (ties keep the previous one), updates `phi` and
    /// asks for a transfer into slot 0 if slot 0 is not best.
    pub fn skewness_analysis(&mut self) -> Option<Analysis> {
        if self.history.len() <= self.config.transfer_threshold {
            return None;
        }
        let accumulated = accumulate(&self.history);
        let top = accumulated.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if accumulated[self.best_index] != top {
            self.best_index = accumulated.iter().position(|&r| r == top).expect("max exists");
        }
        self.phi = skewness(accumulated, self.config.phi_min);
        self.history.clear();
        Some(Analysis {
            accumulated,
            best_index: self.best_index,
            phi: self.phi,
            transfer_from: (self.best_index != 0).then_some(self.best_index),
        })
    }
}
