use std::f64::consts::PI;

use super::{EnvSpec, Environment, EpisodeClock, StepOutcome};
use crate::error::{finite_check, Result};
use crate::numerics::RngStream;

const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const DT: f64 = 0.05;
const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;
const HORIZON: usize = 200;

pub(super) fn spec() -> EnvSpec {
    EnvSpec {
        state_dim: 2,
        observation_dim: 3,
        action_dim: 1,
        action_low: vec![-MAX_TORQUE],
        action_high: vec![MAX_TORQUE],
        state_low: vec![-PI, -MAX_SPEED],
        state_high: vec![PI, MAX_SPEED],
        periodic: vec![true, false],
        max_episode_steps: HORIZON,
    }
}

/// Angle wrapped into `[-π, π)`.
fn wrap_angle(theta: f64) -> f64 {
    (theta + PI).rem_euclid(2.0 * PI) - PI
}

pub(super) fn initial_state(rng: &mut RngStream) -> Vec<f64> {
    vec![rng.uniform_range(-PI, PI), rng.uniform_range(-1.0, 1.0)]
}

pub(super) fn observe(state: &[f64]) -> Vec<f64> {
    vec![state[0].cos(), state[0].sin(), state[1]]
}

pub(super) fn reward(state: &[f64], action: &[f64]) -> f64 {
    let theta = wrap_angle(state[0]);
    let u = action[0].clamp(-MAX_TORQUE, MAX_TORQUE);
    -(theta * theta + 0.1 * state[1] * state[1] + 0.001 * u * u)
}

/// One step of the swing-up pendulum on internal state `(θ, θ̇)`, with θ = 0
/// upright. Returns the next state (angle wrapped) and the step reward.
pub fn pendulum_step(state: [f64; 2], torque: f64) -> Result<([f64; 2], f64)> {
    finite_check("pendulum state", &state)?;
    finite_check("pendulum torque", &[torque])?;
    let [theta, theta_dot] = state;
    let u = torque.clamp(-MAX_TORQUE, MAX_TORQUE);
    let r = reward(&state, &[u]);
    let accel = 3.0 * GRAVITY / (2.0 * LENGTH) * theta.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u;
    let new_theta_dot = (theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
    let new_theta = wrap_angle(theta + new_theta_dot * DT);
    Ok(([new_theta, new_theta_dot], r))
}

#[derive(Debug, Clone)]
pub struct Pendulum {
    spec: EnvSpec,
    clock: EpisodeClock,
}

impl Pendulum {
    pub fn new() -> Self {
        Pendulum { spec: spec(), clock: EpisodeClock::default() }
    }
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset_to(&mut self, state: &[f64]) -> Result<Vec<f64>> {
        self.clock.reset(&self.spec, state)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        let s = self.clock.begin_step(&self.spec, action)?;
        let (next, r) = pendulum_step([s[0], s[1]], action[0])?;
        Ok(self.clock.finish_step(&self.spec, next.to_vec(), r, false))
    }

    fn sample_initial_state(&self, rng: &mut RngStream) -> Vec<f64> {
        initial_state(rng)
    }

    fn analytic_reward(&self, state: &[f64], action: &[f64], _next_state: &[f64]) -> f64 {
        reward(state, action)
    }

    fn observe(&self, state: &[f64]) -> Vec<f64> {
        observe(state)
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
