use super::DynamicsModel;
use crate::envs::{EnvSpec, Environment, EpisodeClock, StepOutcome, Task};
use crate::error::Result;
use crate::numerics::RngStream;

/// Synthetic environment: the learned model supplies transitions and the
/// task's closed-form reward scores them. Episodes end on the horizon only.
#[derive(Debug, Clone)]
pub struct CyberEnv {
    task: Task,
    spec: EnvSpec,
    model: DynamicsModel,
    clock: EpisodeClock,
}

impl CyberEnv {
    pub fn new(task: Task, model: DynamicsModel) -> Self {
        CyberEnv { task, spec: task.spec(), model, clock: EpisodeClock::default() }
    }

    pub fn model(&self) -> &DynamicsModel {
        &self.model
    }

    pub fn model_mut(&mut self) -> &mut DynamicsModel {
        &mut self.model
    }

    pub fn task(&self) -> Task {
        self.task
    }
}

impl Environment for CyberEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset_to(&mut self, state: &[f64]) -> Result<Vec<f64>> {
        self.clock.reset(&self.spec, state)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepOutcome> {
        let s = self.clock.begin_step(&self.spec, action)?.to_vec();
        let a = self.spec.clip_action(action);
        let next = self.model.predict_next(&s, &a)?;
        let reward = self.task.analytic_reward(&s, &a, &next);
        Ok(self.clock.finish_step(&self.spec, next, reward, false))
    }

    fn sample_initial_state(&self, rng: &mut RngStream) -> Vec<f64> {
        self.task.sample_initial_state(rng)
    }

    fn analytic_reward(&self, state: &[f64], action: &[f64], next_state: &[f64]) -> f64 {
        self.task.analytic_reward(state, action, next_state)
    }

    fn observe(&self, state: &[f64]) -> Vec<f64> {
        self.task.observe(state)
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
    use crate::cyber::ModelConfig;
    use crate::envs::Transition;
    use crate::error::Error;

    fn fitted_pendulum_model(rng: &mut RngStream) -> DynamicsModel {
        let mut env = Task::Pendulum.make_env();
        let mut data = Vec::new();
        let mut s = env.reset_random(rng);
        for _ in 0..300 {
            let a = vec![rng.uniform_range(-2.0, 2.0)];
            let out = env.step(&a).unwrap();
            data.push(Transition {
                state: s.clone(),
                action: a,
                reward: out.reward,
                next_state: out.next_state.clone(),
                done: out.terminated,
            });
            s = if out.done() { env.reset_random(rng) } else { out.next_state };
        }
        let mut model = DynamicsModel::new(&Task::Pendulum.spec(), ModelConfig::default(), rng).unwrap();
        model.fit(&data, 2, 32, 1e-3, rng).unwrap();
        model
    }

    #[test]
    fn reset_to_sets_state_exactly() {
        let mut rng = RngStream::new(0);
        let mut cyber = CyberEnv::new(Task::Pendulum, fitted_pendulum_model(&mut rng));
        let s = [0.123, -4.5];
        cyber.reset_to(&s).unwrap();
        assert_eq!(cyber.current_state().unwrap(), &s);
    }

    #[test]
    fn stepping_before_reset_fails() {
        let mut rng = RngStream::new(0);
        let mut cyber = CyberEnv::new(Task::Pendulum, fitted_pendulum_model(&mut rng));
        assert!(matches!(cyber.step(&[0.0]), Err(Error::State(_))));
    }

    #[test]
    fn horizon_terminates_episode() {
        let mut rng = RngStream::new(1);
        let mut cyber = CyberEnv::new(Task::Pendulum, fitted_pendulum_model(&mut rng));
        cyber.reset_to(&[0.5, 0.0]).unwrap();
        let mut n = 0;
        loop {
            let out = cyber.step(&[0.3]).unwrap();
            n += 1;
            assert!(!out.terminated);
            assert!(cyber.spec().contains_state(&out.next_state));
            if out.done() {
                break;
            }
        }
        assert_eq!(n, 200);
    }

    #[test]
    fn reward_comes_from_task_formula() {
        let mut rng = RngStream::new(2);
        let mut cyber = CyberEnv::new(Task::Pendulum, fitted_pendulum_model(&mut rng));
        let s = [1.0, 0.5];
        cyber.reset_to(&s).unwrap();
        let out = cyber.step(&[1.5]).unwrap();
        assert_eq!(out.reward, Task::Pendulum.analytic_reward(&s, &[1.5], &out.next_state));
    }
}
