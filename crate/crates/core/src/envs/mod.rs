//! Benchmark control tasks behind a common [`Environment`] interface.
//!
//! Environments expose their *internal* state (the quantities resets and
//! the learned dynamics model operate on). Controllers see observations
//! produced by [`Environment::observe`].

mod mountain_car;
mod pendulum;

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, finite_check, Error, Result};
use crate::numerics::RngStream;

pub use mountain_car::{mountaincar_step, MountainCar};
pub use pendulum::{pendulum_step, Pendulum};

/// Shapes and bounds of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub observation_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub state_low: Vec<f64>,
    pub state_high: Vec<f64>,
    /// Dimensions that wrap around (angles) instead of saturating.
    pub periodic: Vec<bool>,
    pub max_episode_steps: usize,
}

impl EnvSpec {
    pub fn clip_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(self.action_low.iter().zip(&self.action_high))
            .map(|(&a, (&lo, &hi))| a.clamp(lo, hi))
            .collect()
    }

    /// Maps a state back into the box: periodic dimensions wrap, the rest clip.
    pub fn project_state(&self, state: &mut [f64]) {
        for (i, s) in state.iter_mut().enumerate() {
            let (lo, hi) = (self.state_low[i], self.state_high[i]);
            if self.periodic[i] {
                *s = lo + (*s - lo).rem_euclid(hi - lo);
            } else {
                *s = s.clamp(lo, hi);
            }
        }
    }

    pub fn contains_state(&self, state: &[f64]) -> bool {
        state.len() == self.state_dim
            && state.iter().zip(self.state_low.iter().zip(&self.state_high)).all(|(&s, (&lo, &hi))| s >= lo && s <= hi)
    }

    pub fn contains_action(&self, action: &[f64]) -> bool {
        action.len() == self.action_dim
            && action
                .iter()
                .zip(self.action_low.iter().zip(&self.action_high))
                .all(|(&a, (&lo, &hi))| a >= lo && a <= hi)
    }

    /// Uniform draw from the state box.
    pub fn sample_state_uniform(&self, rng: &mut RngStream) -> Result<Vec<f64>> {
        self.state_low
            .iter()
            .zip(&self.state_high)
            .map(|(&lo, &hi)| {
                if lo.is_finite() && hi.is_finite() {
                    Ok(rng.uniform_range(lo, hi))
                } else {
                    Err(Error::Unsupported("uniform state sampling needs a bounded state box".into()))
                }
            })
            .collect()
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: Vec<f64>,
    pub reward: f64,
    /// Reached a terminal state of the task.
    pub terminated: bool,
    /// Hit the episode horizon.
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// One unit of experience. States are internal task states; `done` marks a
/// true terminal state (horizon cut-offs are not terminal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Resets to a draw from the task's initial-state distribution.
    fn reset_random(&mut self, rng: &mut RngStream) -> Vec<f64> {
        let s = self.sample_initial_state(rng);
        self.reset_to(&s).expect("initial states are valid")
    }

    /// Makes the current state exactly `state` and starts a new episode.
    fn reset_to(&mut self, state: &[f64]) -> Result<Vec<f64>>;

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome>;

    fn sample_initial_state(&self, rng: &mut RngStream) -> Vec<f64>;

    fn sample_state_uniform(&self, rng: &mut RngStream) -> Result<Vec<f64>> {
        self.spec().sample_state_uniform(rng)
    }

    fn analytic_reward(&self, state: &[f64], action: &[f64], next_state: &[f64]) -> f64;

    fn observe(&self, state: &[f64]) -> Vec<f64>;

    /// `None` before the first reset.
    fn current_state(&self) -> Option<&[f64]>;

    /// True once the running episode has ended (or before any reset).
    fn needs_reset(&self) -> bool;

    /// Number of `step` calls ever made on this instance.
    fn total_steps(&self) -> u64;
}

/// Episode bookkeeping shared by the concrete environments.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    pub state: Option<Vec<f64>>,
    pub episode_steps: usize,
    pub total_steps: u64,
    pub done: bool,
}

impl EpisodeClock {
    pub fn reset(&mut self, spec: &EnvSpec, state: &[f64]) -> Result<Vec<f64>> {
        dim_check("reset state", spec.state_dim, state.len())?;
        finite_check("reset state", state)?;
        self.state = Some(state.to_vec());
        self.episode_steps = 0;
        self.done = false;
        Ok(state.to_vec())
    }

    pub fn begin_step(&self, spec: &EnvSpec, action: &[f64]) -> Result<&[f64]> {
        dim_check("action", spec.action_dim, action.len())?;
        finite_check("action", action)?;
        match &self.state {
            None => Err(Error::State("step before reset".into())),
            Some(_) if self.done => Err(Error::State("step after episode end; reset first".into())),
            Some(s) => Ok(s),
        }
    }

    pub fn finish_step(&mut self, spec: &EnvSpec, next: Vec<f64>, reward: f64, terminated: bool) -> StepOutcome {
        self.episode_steps += 1;
        self.total_steps += 1;
        let truncated = !terminated && self.episode_steps >= spec.max_episode_steps;
        self.done = terminated || truncated;
        self.state = Some(next.clone());
        StepOutcome { next_state: next, reward, terminated, truncated }
    }

    pub fn needs_reset(&self) -> bool {
        self.state.is_none() || self.done
    }
}

/// The benchmark tasks available by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Pendulum,
    MountainCar,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Pendulum => "pendulum",
            Task::MountainCar => "mountaincar",
        }
    }

    pub fn from_name(name: &str) -> Option<Task> {
        match name {
            "pendulum" => Some(Task::Pendulum),
            "mountaincar" => Some(Task::MountainCar),
            _ => None,
        }
    }

    pub fn spec(self) -> EnvSpec {
        match self {
            Task::Pendulum => pendulum::spec(),
            Task::MountainCar => mountain_car::spec(),
        }
    }

    pub fn make_env(self) -> Box<dyn Environment> {
        match self {
            Task::Pendulum => Box::new(Pendulum::new()),
            Task::MountainCar => Box::new(MountainCar::new()),
        }
    }

    pub fn observe(self, state: &[f64]) -> Vec<f64> {
        match self {
            Task::Pendulum => pendulum::observe(state),
            Task::MountainCar => state.to_vec(),
        }
    }

    /// Observation map as a plain function pointer.
    pub fn observer(self) -> fn(&[f64]) -> Vec<f64> {
        match self {
            Task::Pendulum => pendulum::observe,
            Task::MountainCar => <[f64]>::to_vec,
        }
    }

    pub fn analytic_reward(self, state: &[f64], action: &[f64], next_state: &[f64]) -> f64 {
        match self {
            Task::Pendulum => pendulum::reward(state, action),
            Task::MountainCar => mountain_car::reward(action, next_state),
        }
    }

    pub fn sample_initial_state(self, rng: &mut RngStream) -> Vec<f64> {
        match self {
            Task::Pendulum => pendulum::initial_state(rng),
            Task::MountainCar => mountain_car::initial_state(rng),
        }
    }

    /// Whether `next_state` is terminal for the task.
    pub fn is_terminal(self, next_state: &[f64]) -> bool {
        match self {
            Task::Pendulum => false,
            Task::MountainCar => mountain_car::at_goal(next_state),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_sampling_stays_in_box() {
        let spec = Task::Pendulum.spec();
        let mut rng = RngStream::new(1);
        for _ in 0..1000 {
            let s = spec.sample_state_uniform(&mut rng).unwrap();
            assert!(spec.contains_state(&s));
            assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&s[0]));
            assert!((-8.0..=8.0).contains(&s[1]));
        }
    }

    #[test]
    fn uniform_sampling_mean_near_midpoint() {
        for task in [Task::Pendulum, Task::MountainCar] {
            let spec = task.spec();
            let mut rng = RngStream::new(17);
            let n = 10_000;
            let mut sums = vec![0.0; spec.state_dim];
            for _ in 0..n {
                for (acc, s) in sums.iter_mut().zip(spec.sample_state_uniform(&mut rng).unwrap()) {
                    *acc += s;
                }
            }
            for d in 0..spec.state_dim {
                let mid = 0.5 * (spec.state_low[d] + spec.state_high[d]);
                let range = spec.state_high[d] - spec.state_low[d];
                assert!((sums[d] / n as f64 - mid).abs() < 0.05 * range);
            }
        }
    }

    #[test]
    fn uniform_sampling_is_deterministic() {
        let spec = Task::MountainCar.spec();
        let a = spec.sample_state_uniform(&mut RngStream::new(8)).unwrap();
        let b = spec.sample_state_uniform(&mut RngStream::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unbounded_box_is_unsupported() {
        let mut spec = Task::Pendulum.spec();
        spec.state_high[1] = f64::INFINITY;
        assert!(matches!(spec.sample_state_uniform(&mut RngStream::new(0)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn projection_wraps_periodic_and_clips_others() {
        let spec = Task::Pendulum.spec();
        let mut s = vec![std::f64::consts::PI + 0.5, 20.0];
        spec.project_state(&mut s);
        assert!((s[0] - (-std::f64::consts::PI + 0.5)).abs() < 1e-12);
        assert_eq!(s[1], 8.0);
    }
}
