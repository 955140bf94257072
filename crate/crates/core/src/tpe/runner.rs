use super::formulas::{compute_kc, compute_tc, reward_sign};
use super::reset::{sampling_reset_cyber, sampling_reset_real, CyberStart};
use super::{TpeAction, TpeConfig, TpeObsMode};
use crate::controller::{DdpgController, ReplayBuffer, TrainReport};
use crate::cyber::{CyberEnv, DynamicsModel};
use crate::envs::{Environment, Task, Transition};
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Which controller produced a real action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorChoice {
    Own,
    Reference,
}

#[derive(Debug, Clone, Default)]
pub struct RealSampleReport {
    pub transitions: Vec<Transition>,
    pub provenance: Vec<ActorChoice>,
}

impl RealSampleReport {
    pub fn mean_reward(&self) -> Option<f64> {
        if self.transitions.is_empty() {
            None
        } else {
            Some(self.transitions.iter().map(|t| t.reward).sum::<f64>() / self.transitions.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpeStepReport {
    pub observation: f64,
    /// Sign of the change in average sampling reward: −1, 0 or +1.
    pub reward: i8,
    /// Mean per-step reward of this step's real samples.
    pub raw_avg_reward: f64,
    pub real_samples_used_total: usize,
    pub real_samples_this_step: usize,
    pub cyber_samples_this_step: usize,
    pub train: TrainReport,
    pub cyber_start_fallbacks: usize,
    pub done: bool,
}

/// One model-based training process: real and synthetic environments, the
/// target controller, both replay buffers and the real-sample account.
pub struct Tpe {
    config: TpeConfig,
    real_env: Box<dyn Environment>,
    cyber: CyberEnv,
    controller: DdpgController,
    real_buffer: ReplayBuffer,
    cyber_buffer: ReplayBuffer,
    real_used: usize,
    last_avg_reward: f64,
    steps: usize,
    /// Actor driving the unfinished real episode, if any.
    segment_actor: Option<ActorChoice>,
    rng: RngStream,
}

impl Tpe {
    /// Builds a TPE for one of the benchmark tasks; every random component is
    /// derived from `seed`.
    pub fn for_task(task: Task, config: TpeConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = RngStream::new(seed);
        let spec = task.spec();
        let controller = DdpgController::new(&spec, task.observer(), config.ddpg.clone(), &mut rng.fork())?;
        let model = DynamicsModel::new(&spec, config.model.clone(), &mut rng.fork())?;
        Tpe::new(config, task.make_env(), controller, CyberEnv::new(task, model), rng)
    }

    /// Initialization: collects `init_samples` real transitions with uniform
    /// random actions and fits the dynamics model once on them.
    pub fn new(
        config: TpeConfig,
        real_env: Box<dyn Environment>,
        controller: DdpgController,
        cyber: CyberEnv,
        mut rng: RngStream,
    ) -> Result<Self> {
        config.validate()?;
        let capacity = config.ddpg.buffer_capacity;
        let mut tpe = Tpe {
            real_env,
            cyber,
            controller,
            real_buffer: ReplayBuffer::new(capacity),
            cyber_buffer: ReplayBuffer::new(capacity),
            real_used: 0,
            last_avg_reward: 0.0,
            steps: 0,
            segment_actor: None,
            rng: rng.fork(),
            config,
        };
        let mut rewards = 0.0;
        for _ in 0..tpe.config.init_samples {
            if tpe.real_env.needs_reset() {
                tpe.real_env.reset_random(&mut tpe.rng);
            }
            let spec = tpe.real_env.spec().clone();
            let action: Vec<f64> =
                spec.action_low.iter().zip(&spec.action_high).map(|(&lo, &hi)| tpe.rng.uniform_range(lo, hi)).collect();
            let t = tpe.real_step(action)?;
            rewards += t.reward;
            tpe.real_buffer.push(t);
        }
        if tpe.config.init_samples > 0 {
            tpe.last_avg_reward = rewards / tpe.config.init_samples as f64;
            tpe.refit_model()?;
        }
        Ok(tpe)
    }

    fn real_step(&mut self, action: Vec<f64>) -> Result<Transition> {
        let state =
            self.real_env.current_state().ok_or_else(|| Error::State("real environment not reset".into()))?.to_vec();
        let out = self.real_env.step(&action)?;
        self.real_used += 1;
        Ok(Transition { state, action, reward: out.reward, next_state: out.next_state, done: out.terminated })
    }

    pub fn config(&self) -> &TpeConfig {
        &self.config
    }

    pub fn controller(&self) -> &DdpgController {
        &self.controller
    }

    pub fn controller_mut(&mut self) -> &mut DdpgController {
        &mut self.controller
    }

    pub fn real_buffer(&self) -> &ReplayBuffer {
        &self.real_buffer
    }

    pub fn cyber_buffer(&self) -> &ReplayBuffer {
        &self.cyber_buffer
    }

    pub fn cyber_env(&self) -> &CyberEnv {
        &self.cyber
    }

    pub fn real_env(&self) -> &dyn Environment {
        self.real_env.as_ref()
    }

    /// Real samples drawn so far (`n`).
    pub fn real_samples_used(&self) -> usize {
        self.real_used
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn last_avg_reward(&self) -> f64 {
        self.last_avg_reward
    }

    pub fn model_fitted(&self) -> bool {
        self.cyber.model().is_ready()
    }

    pub fn is_done(&self) -> bool {
        self.real_used >= self.config.budget_n
    }

    pub fn remaining_budget(&self) -> usize {
        self.config.budget_n.saturating_sub(self.real_used)
    }

    pub fn observation(&self) -> f64 {
        match self.config.obs_mode {
            TpeObsMode::Constant => 0.0,
            TpeObsMode::LastAvgReward => self.last_avg_reward,
            TpeObsMode::SampleRatio => self.real_used as f64 / self.config.budget_n as f64,
        }
    }

    /// One full step: train, sample real, sample synthetic, refit, score.
    pub fn step(&mut self, action: TpeAction) -> Result<TpeStepReport> {
        if self.is_done() {
            return Err(Error::State("real-sample budget exhausted".into()));
        }
        let train = self.train_phase(action)?;
        let quota = self.config.k_real.min(self.remaining_budget());
        let real = self.sample_real(quota, action.a0, None)?;
        let (cyber_samples, fallbacks) = self.sample_cyber(action)?;
        self.refit_model()?;
        Ok(self.finish_step(&real, cyber_samples, fallbacks, train))
    }

    /// Trains the controller with `T_r` real and `T_c` synthetic batches
    /// once the real buffer holds the warm-up amount.
    pub fn train_phase(&mut self, action: TpeAction) -> Result<TrainReport> {
        if self.real_buffer.len() < self.config.ddpg.warmup_size.max(self.config.ddpg.batch_size) {
            return Ok(TrainReport::default());
        }
        let t_cyber = compute_tc(self.config.t_real, action.a2)?;
        self.controller.train_mixed(&self.real_buffer, &self.cyber_buffer, self.config.t_real, t_cyber, &mut self.rng)
    }

    /// Draws `count` real transitions with exploration. New episodes start
    /// through the quality-driven reset. With a reference controller, each
    /// episode segment is driven by it with probability `p_ref`.
    pub fn sample_real(
        &mut self,
        count: usize,
        a0: f64,
        reference: Option<(&DdpgController, f64)>,
    ) -> Result<RealSampleReport> {
        let mut report = RealSampleReport::default();
        let mut resumed = self.segment_actor.is_some();
        for _ in 0..count {
            if self.real_env.needs_reset() {
                sampling_reset_real(
                    self.real_env.as_mut(),
                    a0,
                    &self.controller,
                    self.config.m1,
                    self.config.m2,
                    &mut self.rng,
                )?;
                self.segment_actor = None;
                resumed = false;
            }
            if self.segment_actor.is_none() || resumed {
                resumed = false;
                let choice = match reference {
                    Some((_, p_ref)) if self.rng.uniform() < p_ref => ActorChoice::Reference,
                    _ => ActorChoice::Own,
                };
                self.segment_actor = Some(choice);
            }
            let choice = self.segment_actor.expect("set above");
            let state = self.real_env.current_state().expect("environment was reset").to_vec();
            let actor = match (choice, reference) {
                (ActorChoice::Reference, Some((r, _))) => r,
                _ => &self.controller,
            };
            let action = actor.act(&state, true, &mut self.rng)?;
            let t = self.real_step(action)?;
            if self.real_env.needs_reset() {
                self.segment_actor = None;
            }
            self.real_buffer.push(t.clone());
            report.transitions.push(t);
            report.provenance.push(choice);
        }
        Ok(report)
    }

    /// Draws `K_c` synthetic transitions into the synthetic buffer. Skipped
    /// while the model has not been fitted. Returns the number drawn and the
    /// number of empty-buffer fallbacks.
    pub fn sample_cyber(&mut self, action: TpeAction) -> Result<(usize, usize)> {
        let k_cyber = compute_kc(self.config.k_real, action.a2)?;
        if k_cyber == 0 || !self.model_fitted() {
            return Ok((0, 0));
        }
        let mut fallbacks = 0;
        for _ in 0..k_cyber {
            if self.cyber.needs_reset() {
                let (_, kind) = sampling_reset_cyber(&mut self.cyber, action.a1, &self.real_buffer, &mut self.rng)?;
                if kind == CyberStart::EmptyBufferFallback {
                    fallbacks += 1;
                }
            }
            let state = self.cyber.current_state().expect("reset above").to_vec();
            let a = self.controller.act(&state, true, &mut self.rng)?;
            let out = self.cyber.step(&a)?;
            self.cyber_buffer.push(Transition {
                state,
                action: a,
                reward: out.reward,
                next_state: out.next_state,
                done: out.terminated,
            });
        }
        Ok((k_cyber, fallbacks))
    }

    /// Refits the dynamics model on the whole real buffer.
    pub fn refit_model(&mut self) -> Result<()> {
        if self.real_buffer.is_empty() {
            return Ok(());
        }
        self.cyber.model_mut().refit(self.real_buffer.as_slice(), &mut self.rng)?;
        Ok(())
    }

    /// Appends real transitions gathered elsewhere (no budget is charged).
    pub fn absorb_shared<'a, I: IntoIterator<Item = &'a Transition>>(&mut self, shared: I) {
        for t in shared {
            self.real_buffer.push(t.clone());
        }
    }

    /// Closes a step: updates the average sampling reward and the sign reward.
    pub fn finish_step(
        &mut self,
        real: &RealSampleReport,
        cyber_samples: usize,
        cyber_start_fallbacks: usize,
        train: TrainReport,
    ) -> TpeStepReport {
        let avg = real.mean_reward().unwrap_or(self.last_avg_reward);
        let reward = reward_sign(self.last_avg_reward, avg);
        self.last_avg_reward = avg;
        self.steps += 1;
        TpeStepReport {
            observation: self.observation(),
            reward,
            raw_avg_reward: avg,
            real_samples_used_total: self.real_used,
            real_samples_this_step: real.transitions.len(),
            cyber_samples_this_step: cyber_samples,
            train,
            cyber_start_fallbacks,
            done: self.is_done(),
        }
    }
}
