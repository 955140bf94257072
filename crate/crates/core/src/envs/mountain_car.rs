use super::{EnvSpec, Environment, EpisodeClock, StepOutcome};
use crate::error::{finite_check, Result};
use crate::numerics::RngStream;

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POSITION: f64 = 0.45;
const POWER: f64 = 0.0015;
const HORIZON: usize = 999;

pub(super) fn spec() -> EnvSpec {
    EnvSpec {
        state_dim: 2,
        observation_dim: 2,
        action_dim: 1,
        action_low: vec![-1.0],
        action_high: vec![1.0],
        state_low: vec![MIN_POSITION, -MAX_SPEED],
        state_high: vec![MAX_POSITION, MAX_SPEED],
        periodic: vec![false, false],
        max_episode_steps: HORIZON,
    }
}

pub(super) fn initial_state(rng: &mut RngStream) -> Vec<f64> {
    vec![rng.uniform_range(-0.6, -0.4), 0.0]
}

pub(super) fn at_goal(state: &[f64]) -> bool {
    state[0] >= GOAL_POSITION
}

pub(super) fn reward(action: &[f64], next_state: &[f64]) -> f64 {
    let force = action[0].clamp(-1.0, 1.0);
    let bonus = if at_goal(next_state) { 100.0 } else { 0.0 };
    bonus - 0.1 * force * force
}

/// One step of the continuous mountain car on `(position, velocity)`.
/// Returns the next state, the reward and whether the goal was reached.
pub fn mountaincar_step(state: [f64; 2], force: f64) -> Result<([f64; 2], f64, bool)> {
    finite_check("mountain car state", &state)?;
    finite_check("mountain car force", &[force])?;
    let [position, velocity] = state;
    let force = force.clamp(-1.0, 1.0);
    let mut velocity = (velocity + force * POWER - (3.0 * position).cos() * 0.0025).clamp(-MAX_SPEED, MAX_SPEED);
    let position = (position + velocity).clamp(MIN_POSITION, MAX_POSITION);
    if position == MIN_POSITION && velocity < 0.0 {
        velocity = 0.0;
    }
    let next = [position, velocity];
    let done = at_goal(&next);
    Ok((next, reward(&[force], &next), done))
}

#[derive(Debug, Clone)]
pub struct MountainCar {
    spec: EnvSpec,
    clock: EpisodeClock,
}

impl MountainCar {
    pub fn new() -> Self {
        MountainCar { spec: spec(), clock: EpisodeClock::default() }
    }
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset_to(&mut self, state: &[f64]) -> Result<Vec<f64>> {
        self.clock.reset(&self.spec, state)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        let s = self.clock.begin_step(&self.spec, action)?;
        let (next, r, done) = mountaincar_step([s[0], s[1]], action[0])?;
        Ok(self.clock.finish_step(&self.spec, next.to_vec(), r, done))
    }

    fn sample_initial_state(&self, rng: &mut RngStream) -> Vec<f64> {
        initial_state(rng)
    }

    fn analytic_reward(&self, _state: &[f64], action: &[f64], next_state: &[f64]) -> f64 {
        reward(action, next_state)
    }

    fn observe(&self, state: &[f64]) -> Vec<f64> {
        state.to_vec()
    }

    fn current_state(&self) -> Option<&[f64]> {
        self.clock.state.as_deref()
    }

    fn needs_reset(&self) -> bool {
        self.clock.needs_reset()
    }

    fn total_steps(&self) -> u64 {
        self.clock.total_steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_gives_bonus_and_terminates() {
        for v in [0.0, 0.01, 0.07] {
            let (_, r, done) = mountaincar_step([0.46, v], 0.0).unwrap();
            assert!(done);
            assert_eq!(r, 100.0);
        }
    }

    #[test]
    fn gravity_term_at_origin() {
        let (next, r, done) = mountaincar_step([0.0, 0.0], 0.0).unwrap();
        assert!((next[1] + 0.0025).abs() < 1e-15);
        assert_eq!(r, 0.0);
        assert!(!done);
    }

    #[test]
    fn control_cost() {
        let (_, r, _) = mountaincar_step([-0.5, 0.0], 3.0).unwrap();
        assert!((r + 0.1).abs() < 1e-15);
    }

    #[test]
    fn left_wall_stops_the_car() {
        let (next, _, _) = mountaincar_step([-1.19, -0.07], -1.0).unwrap();
        assert_eq!(next, [MIN_POSITION, 0.0]);
    }

    #[test]
    fn episode_terminates_at_goal() {
        let mut env = MountainCar::new();
        env.reset_to(&[0.44, 0.05]).unwrap();
        let out = env.step(&[1.0]).unwrap();
        assert!(out.terminated && out.done());
        assert!(env.needs_reset());
    }
}
