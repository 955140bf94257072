use super::state::{EnsembleConfig, EnsembleState, StepRecord, SLOTS};
use crate::controller::TrainReport;
use crate::envs::{Task, Transition};
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::tpe::{ActorChoice, Tpe, TpeConfig, TpeObsMode, TpeStepReport};
use crate::trainers::{ActionTable, BaselineKind, BaselineTrainer, Choice, DqnConfig, DqnTrainer, TrainerSample};

#[derive(Debug, Clone, PartialEq)]
pub struct SlotStepReport {
    pub choice: Choice,
    pub observation: f64,
    pub step: TpeStepReport,
    pub train: TrainReport,
    pub provenance: Vec<ActorChoice>,
    /// Transitions received from the other slots before training.
    pub shared_in: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStepReport {
    pub slots: Vec<SlotStepReport>,
    pub record: StepRecord,
    pub real_samples_total: usize,
    pub done: bool,
}

/// Three TPEs driven by a DQN trainer (slot 0), a uniform random trainer
/// (slot 1) and the real-data-only trainer (slot 2), sharing real data and
/// a common sample budget.
pub struct Ensemble {
    tpe_config: TpeConfig,
    state: EnsembleState,
    dqn: DqnTrainer,
    random: BaselineTrainer,
    nocyber: BaselineTrainer,
    slots: Vec<Tpe>,
    log: Vec<Transition>,
    marks: [usize; SLOTS],
    rng: RngStream,
}

impl Ensemble {
    /// `tpe_config.k_real` is the per-step total across slots and must be a
    /// multiple of three; `tpe_config.budget_n` is the shared budget, which
    /// also pays for every slot's initial samples.
    pub fn for_task(
        task: Task,
        tpe_config: TpeConfig,
        table: ActionTable,
        dqn_config: DqnConfig,
        config: EnsembleConfig,
        seed: u64,
    ) -> Result<Self> {
        tpe_config.validate()?;
        if !tpe_config.k_real.is_multiple_of(SLOTS) {
            return Err(Error::InvalidArgument(format!(
                "ensemble needs k_real divisible by 3, got {}",
                tpe_config.k_real
            )));
        }
        if SLOTS * tpe_config.init_samples > tpe_config.budget_n {
            return Err(Error::InvalidArgument("initial samples of three slots exceed the budget".into()));
        }
        let mut rng = RngStream::new(seed);
        let slot_config = TpeConfig { k_real: tpe_config.k_real / SLOTS, ..tpe_config.clone() };
        let mut slots = Vec::with_capacity(SLOTS);
        for _ in 0..SLOTS {
            let slot_seed = rng.fork().seed();
            slots.push(Tpe::for_task(task, slot_config.clone(), slot_seed)?);
        }
        let dqn = DqnTrainer::new(table.clone(), dqn_config, &mut rng.fork())?;
        let initial: Vec<Vec<Transition>> = slots.iter().map(|s| s.real_buffer().iter().cloned().collect()).collect();
        for (i, slot) in slots.iter_mut().enumerate() {
            for (j, data) in initial.iter().enumerate() {
                if i != j {
                    slot.absorb_shared(data);
                }
            }
        }
        let log: Vec<Transition> = initial.into_iter().flatten().collect();
        let marks = [log.len(); SLOTS];
        let ensemble = Ensemble {
            state: EnsembleState::new(config)?,
            dqn,
            random: BaselineTrainer::new(BaselineKind::Random, table.clone()),
            nocyber: BaselineTrainer::new(BaselineKind::NoCyber, table),
            slots,
            log,
            marks,
            rng,
            tpe_config,
        };
        Ok(ensemble)
    }

    /// Number of ensemble steps the budget allows after initialization.
    pub fn planned_steps(tpe_config: &TpeConfig) -> usize {
        let left = tpe_config.budget_n.saturating_sub(SLOTS * tpe_config.init_samples);
        left.div_ceil(tpe_config.k_real.max(1))
    }

    pub fn state(&self) -> &EnsembleState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut EnsembleState {
        &mut self.state
    }

    pub fn dqn(&self) -> &DqnTrainer {
        &self.dqn
    }

    pub fn slot(&self, i: usize) -> &Tpe {
        &self.slots[i]
    }

    pub fn slot_mut(&mut self, i: usize) -> &mut Tpe {
        &mut self.slots[i]
    }

    pub fn budget(&self) -> usize {
        self.tpe_config.budget_n
    }

    /// Real samples drawn by all slots together.
    pub fn real_samples_used(&self) -> usize {
        self.slots.iter().map(Tpe::real_samples_used).sum()
    }

    pub fn is_done(&self) -> bool {
        self.real_samples_used() >= self.tpe_config.budget_n
    }

    /// Index of the slot whose controller is currently trusted most.
    pub fn best_index(&self) -> usize {
        self.state.best_index()
    }

    /// Observation seen by slot `i`; the sample ratio is measured against the
    /// shared budget.
    pub fn observation(&self, i: usize) -> f64 {
        match self.tpe_config.obs_mode {
            TpeObsMode::SampleRatio => self.real_samples_used() as f64 / self.tpe_config.budget_n as f64,
            _ => self.slots[i].observation(),
        }
    }

    fn absorb(&mut self, i: usize) -> usize {
        let fresh = &self.log[self.marks[i]..];
        let n = fresh.len();
        self.slots[i].absorb_shared(fresh);
        self.marks[i] = self.log.len();
        n
    }

    pub fn step(&mut self) -> Result<EnsembleStepReport> {
        if self.is_done() {
            return Err(Error::State("real-sample budget exhausted".into()));
        }
        let t = self.state.t();
        let p_ref = self.state.current_p_ref();
        let best = self.state.best_index();
        let observations: Vec<f64> = (0..SLOTS).map(|i| self.observation(i)).collect();
        let mut choices = Vec::with_capacity(SLOTS);
        let i0 = self.dqn.select_action(observations[0], t, &mut self.rng)?;
        choices.push(Choice { index: Some(i0), action: self.dqn.table().actions()[i0] });
        choices.push(self.random.select(&mut self.rng));
        choices.push(self.nocyber.select(&mut self.rng));

        let quota = self.tpe_config.k_real / SLOTS;
        let mut reports = Vec::with_capacity(SLOTS);
        let mut raw = [0.0; SLOTS];
        for i in 0..SLOTS {
            let action = choices[i].action;
            let shared_in = self.absorb(i);
            let train = self.slots[i].train_phase(action)?;
            let count = quota.min(self.tpe_config.budget_n - self.real_samples_used());
            let real = if i == best || p_ref == 0.0 {
                self.slots[i].sample_real(count, action.a0, None)?
            } else {
                let (slot, reference) = pair_mut(&mut self.slots, i, best);
                slot.sample_real(count, action.a0, Some((reference.controller(), p_ref)))?
            };
            let (cyber, fallbacks) = self.slots[i].sample_cyber(action)?;
            self.slots[i].refit_model()?;
            let step = self.slots[i].finish_step(&real, cyber, fallbacks, train.clone());
            raw[i] = step.raw_avg_reward;
            self.log.extend(real.transitions.iter().cloned());
            self.marks[i] = self.log.len();
            reports.push(SlotStepReport {
                choice: choices[i],
                observation: observations[i],
                step,
                train,
                provenance: real.provenance,
                shared_in,
            });
        }

        let record = self.state.finish_step(raw)?;
        if record.evaluated {
            for (i, report) in reports.iter().enumerate() {
                let action = report.choice.index.unwrap_or_else(|| self.dqn.table().nearest(&report.choice.action));
                let sample = TrainerSample {
                    obs: report.observation,
                    action,
                    reward: f64::from(record.ranks[i]),
                    next_obs: self.observation(i),
                };
                self.dqn.store(sample, &mut self.rng)?;
            }
            self.dqn.update(&mut self.rng)?;
        }
        if let Some(src) = record.analysis.and_then(|a| a.transfer_from) {
            let (target, source) = pair_mut(&mut self.slots, 0, src);
            target.controller_mut().copy_weights_from(source.controller())?;
        }
        Ok(EnsembleStepReport {
            slots: reports,
            record,
            real_samples_total: self.real_samples_used(),
            done: self.is_done(),
        })
    }
}

fn pair_mut(slots: &mut [Tpe], i: usize, j: usize) -> (&mut Tpe, &Tpe) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = slots.split_at_mut(j);
        (&mut a[i], &b[0])
    } else {
        let (a, b) = slots.split_at_mut(i);
        (&mut b[0], &a[j])
    }
}
