use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleConfig;
use crate::envs::Task;
use crate::error::{Error, Result};
use crate::numerics::Activation;
use crate::tpe::{TpeAction, TpeConfig, TpeObsMode};
use crate::trainers::{DqnConfig, ReinforceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainerKind {
    /// DQN over the two-level action table.
    Dqn,
    /// DQN over the five-level action table.
    Dqn5,
    /// DQN with a 2000-sample memory.
    DqnMem2000,
    Reinforce,
    Random,
    Fixed,
    NoCyber,
    Ensemble,
}

impl TrainerKind {
    pub const ALL: [TrainerKind; 8] = [
        TrainerKind::Dqn,
        TrainerKind::Dqn5,
        TrainerKind::DqnMem2000,
        TrainerKind::Reinforce,
        TrainerKind::Random,
        TrainerKind::Fixed,
        TrainerKind::NoCyber,
        TrainerKind::Ensemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainerKind::Dqn => "dqn",
            TrainerKind::Dqn5 => "dqn5",
            TrainerKind::DqnMem2000 => "dqn-mem2000",
            TrainerKind::Reinforce => "reinforce",
            TrainerKind::Random => "random",
            TrainerKind::Fixed => "fixed",
            TrainerKind::NoCyber => "nocyber",
            TrainerKind::Ensemble => "ensemble",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        TrainerKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

pub fn obs_mode_name(mode: TpeObsMode) -> &'static str {
    match mode {
        TpeObsMode::Constant => "const",
        TpeObsMode::LastAvgReward => "v1",
        TpeObsMode::SampleRatio => "v2",
    }
}

fn obs_mode_from_name(name: &str) -> Option<TpeObsMode> {
    match name {
        "const" => Some(TpeObsMode::Constant),
        "v1" => Some(TpeObsMode::LastAvgReward),
        "v2" => Some(TpeObsMode::SampleRatio),
        _ => None,
    }
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Identity => "identity",
        Activation::Tanh => "tanh",
        Activation::Relu => "relu",
    }
}

fn activation_from_name(name: &str) -> Option<Activation> {
    match name {
        "identity" => Some(Activation::Identity),
        "tanh" => Some(Activation::Tanh),
        "relu" => Some(Activation::Relu),
        _ => None,
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub trainer: TrainerKind,
    pub seed: u64,
    /// TPE steps between evaluations.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub output_dir: PathBuf,
    /// Constant action of the `fixed` trainer.
    pub fixed_action: TpeAction,
    /// Evaluation return that counts as solving the task.
    pub target_return: Option<f64>,
    /// End the run at the first evaluation reaching `target_return`.
    pub stop_at_target: bool,
    pub tpe: TpeConfig,
    pub ensemble: EnsembleConfig,
    pub dqn: DqnConfig,
    pub reinforce: ReinforceConfig,
}

impl ExperimentConfig {
    /// Defaults for `task`.
    pub fn for_task(task: Task) -> Self {
        let mut tpe = TpeConfig::default();
        tpe.model.epochs = 1;
        tpe.model.max_batches_per_epoch = Some(20);
        let mut ensemble = EnsembleConfig::default();
        let (eval_interval, target) = match task {
            Task::Pendulum => {
                tpe.budget_n = 50_000;
                tpe.k_real = 50;
                tpe.t_real = 50;
                (10, -500.0)
            }
            Task::MountainCar => {
                tpe.budget_n = 30_000;
                tpe.k_real = 1;
                tpe.t_real = 1;
                ensemble.transfer_threshold = 100;
                (300, 90.0)
            }
        };
        ExperimentConfig {
            task,
            trainer: TrainerKind::Dqn,
            seed: 0,
            eval_interval,
            eval_episodes: 5,
            output_dir: PathBuf::from("out"),
            fixed_action: TpeAction { a0: 0.6, a1: 0.6, a2: 0.6 },
            target_return: Some(target),
            stop_at_target: false,
            tpe,
            ensemble,
            dqn: DqnConfig::default(),
            reinforce: ReinforceConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config { line: 0, message: m.to_string() });
        if self.eval_interval == 0 {
            return bad("eval_interval must be at least 1");
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes must be at least 1");
        }
        if self.tpe.budget_n == 0 {
            return bad("budget_n must be positive");
        }
        if self.stop_at_target && self.target_return.is_none() {
            return bad("stop_at_target needs target_return");
        }
        TpeAction::new(self.fixed_action.a0, self.fixed_action.a1, self.fixed_action.a2)
            .map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
        let tpe_check = if self.trainer == TrainerKind::Ensemble {
            if !self.tpe.k_real.is_multiple_of(3) {
                return bad("ensemble needs k_real divisible by 3");
            }
            if 3 * self.tpe.init_samples > self.tpe.budget_n {
                return bad("ensemble initial samples (3 × init_samples) exceed budget_n");
            }
            self.ensemble.validate().and(self.tpe.validate())
        } else {
            self.tpe.validate()
        };
        tpe_check.map_err(|e| Error::Config { line: 0, message: e.to_string() })
    }

    /// Serializes to the `key = value` format; parsing the text yields an
    /// equal config.
    pub fn to_config_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let t = &self.tpe;
        let mut lines = vec![
            format!("task = {}", self.task.name()),
            format!("trainer = {}", self.trainer.name()),
            format!("tpe_obs = {}", obs_mode_name(t.obs_mode)),
            format!("seed = {}", self.seed),
            format!("budget_n = {}", t.budget_n),
            format!("k_real = {}", t.k_real),
            format!("t_real = {}", t.t_real),
            format!("init_samples = {}", t.init_samples),
            format!("m1 = {}", t.m1),
            format!("m2 = {}", t.m2),
            format!("eval_interval = {}", self.eval_interval),
            format!("eval_episodes = {}", self.eval_episodes),
            format!("output_dir = {}", self.output_dir.display()),
            format!("a0 = {}", self.fixed_action.a0),
            format!("a1 = {}", self.fixed_action.a1),
            format!("a2 = {}", self.fixed_action.a2),
            format!("target_return = {}", self.target_return.map_or("none".to_string(), |v| v.to_string())),
            format!("stop_at_target = {}", self.stop_at_target),
            format!("gamma = {}", t.ddpg.gamma),
            format!("tau = {}", t.ddpg.tau),
            format!("actor_lr = {}", t.ddpg.actor_lr),
            format!("critic_lr = {}", t.ddpg.critic_lr),
            format!("batch_size = {}", t.ddpg.batch_size),
            format!("noise_scale = {}", t.ddpg.noise_scale),
            format!("warmup_size = {}", t.ddpg.warmup_size),
            format!("buffer_capacity = {}", t.ddpg.buffer_capacity),
            format!("controller_hidden = {}", list(&t.ddpg.hidden)),
            format!("controller_activation = {}", activation_name(t.ddpg.hidden_activation)),
            format!("model_hidden = {}", list(&t.model.hidden)),
            format!("model_activation = {}", activation_name(t.model.activation)),
            format!("model_epochs = {}", t.model.epochs),
            format!("model_batch_size = {}", t.model.batch_size),
            format!("model_lr = {}", t.model.learning_rate),
            format!(
                "model_max_batches = {}",
                t.model.max_batches_per_epoch.map_or("none".to_string(), |v| v.to_string())
            ),
            format!("transfer_threshold = {}", self.ensemble.transfer_threshold),
            format!("phi_max = {}", self.ensemble.phi_max),
            format!("phi_min = {}", self.ensemble.phi_min),
            format!("dqn_memory = {}", self.dqn.memory),
            format!("dqn_hidden = {}", self.dqn.hidden),
            format!("dqn_gamma = {}", self.dqn.gamma),
            format!("dqn_lr = {}", self.dqn.learning_rate),
            format!("reinforce_lr = {}", self.reinforce.learning_rate),
        ];
        lines.push(String::new());
        lines.join("\n")
    }
}

/// Reads a config file, then applies command-line `(key, value)` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config { line: 0, message: format!("{}: {e}", p.display()) })?,
        None => String::new(),
    };
    parse_config(&text, overrides)
}

/// Parses `key = value` lines (`#` starts a comment). Overrides win over the
/// file and are reported as line 0. Task-dependent defaults follow the final
/// `task` value.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config { line: n + 1, message: format!("expected `key = value`, got `{line}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config { line: n + 1, message: "empty key or value".into() });
        }
        entries.push((n + 1, key.to_string(), value.to_string()));
    }
    for (k, v) in overrides {
        entries.push((0, k.trim().to_string(), v.trim().to_string()));
    }

    let task = match entries.iter().rev().find(|(_, k, _)| k == "task") {
        Some((line, _, v)) => {
            Task::from_name(v).ok_or_else(|| Error::Config { line: *line, message: format!("unknown task `{v}`") })?
        }
        None => Task::Pendulum,
    };
    let mut cfg = ExperimentConfig::for_task(task);
    let mut explicit = BTreeSet::new();
    for (line, key, value) in &entries {
        apply(&mut cfg, key, value).map_err(|message| Error::Config { line: *line, message })?;
        explicit.insert(key.as_str());
        if key == "a2" && cfg.fixed_action.a2 == 0.0 {
            return Err(Error::Config { line: *line, message: "a2 must be positive".into() });
        }
    }
    if cfg.trainer == TrainerKind::Ensemble && !explicit.contains("k_real") {
        cfg.tpe.k_real = cfg.tpe.k_real.div_ceil(3) * 3;
    }
    if !explicit.contains("dqn_memory") {
        cfg.dqn.memory = match cfg.trainer {
            TrainerKind::Dqn5 => 125,
            TrainerKind::DqnMem2000 => 2000,
            _ => cfg.dqn.memory,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply(cfg: &mut ExperimentConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
        v.parse().map_err(|_| format!("malformed value `{v}` for `{key}`"))
    }
    fn real(key: &str, v: &str) -> std::result::Result<f64, String> {
        let x: f64 = num(key, v)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(format!("`{key}` must be finite"))
        }
    }
    fn optional<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<Option<T>, String> {
        if v == "none" {
            Ok(None)
        } else {
            num(key, v).map(Some)
        }
    }
    fn sizes(key: &str, v: &str) -> std::result::Result<Vec<usize>, String> {
        let out: Vec<usize> = v.split(',').map(|s| num(key, s.trim())).collect::<std::result::Result<_, _>>()?;
        if out.contains(&0) {
            return Err(format!("`{key}` layer sizes must be positive"));
        }
        Ok(out)
    }
    fn activation(key: &str, v: &str) -> std::result::Result<Activation, String> {
        activation_from_name(v).ok_or_else(|| format!("unknown activation `{v}` for `{key}`"))
    }
    let t = &mut cfg.tpe;
    match key {
        "task" => {
            cfg.task = Task::from_name(value).ok_or_else(|| format!("unknown task `{value}`"))?;
        }
        "trainer" => {
            cfg.trainer = TrainerKind::from_name(value).ok_or_else(|| format!("unknown trainer `{value}`"))?;
        }
        "tpe_obs" => {
            t.obs_mode = obs_mode_from_name(value).ok_or_else(|| format!("unknown tpe_obs `{value}`"))?;
        }
        "seed" => cfg.seed = num(key, value)?,
        "budget_n" | "budget" => t.budget_n = num(key, value)?,
        "k_real" => t.k_real = num(key, value)?,
        "t_real" => t.t_real = num(key, value)?,
        "init_samples" => t.init_samples = num(key, value)?,
        "m1" => t.m1 = num(key, value)?,
        "m2" => t.m2 = num(key, value)?,
        "eval_interval" => cfg.eval_interval = num(key, value)?,
        "eval_episodes" => cfg.eval_episodes = num(key, value)?,
        "output_dir" | "out" => cfg.output_dir = PathBuf::from(value),
        "a0" => cfg.fixed_action.a0 = real(key, value)?,
        "a1" => cfg.fixed_action.a1 = real(key, value)?,
        "a2" => cfg.fixed_action.a2 = real(key, value)?,
        "target_return" => cfg.target_return = optional(key, value)?,
        "stop_at_target" => cfg.stop_at_target = num(key, value)?,
        "gamma" => t.ddpg.gamma = real(key, value)?,
        "tau" => t.ddpg.tau = real(key, value)?,
        "actor_lr" => t.ddpg.actor_lr = real(key, value)?,
        "critic_lr" => t.ddpg.critic_lr = real(key, value)?,
        "batch_size" => t.ddpg.batch_size = num(key, value)?,
        "noise_scale" => t.ddpg.noise_scale = real(key, value)?,
        "warmup_size" => t.ddpg.warmup_size = num(key, value)?,
        "buffer_capacity" => t.ddpg.buffer_capacity = num(key, value)?,
        "controller_hidden" => t.ddpg.hidden = sizes(key, value)?,
        "controller_activation" => t.ddpg.hidden_activation = activation(key, value)?,
        "model_hidden" => t.model.hidden = sizes(key, value)?,
        "model_activation" => t.model.activation = activation(key, value)?,
        "model_epochs" => t.model.epochs = num(key, value)?,
        "model_batch_size" => t.model.batch_size = num(key, value)?,
        "model_lr" => t.model.learning_rate = real(key, value)?,
        "model_max_batches" => t.model.max_batches_per_epoch = optional(key, value)?,
        "transfer_threshold" => cfg.ensemble.transfer_threshold = num(key, value)?,
        "phi_max" => cfg.ensemble.phi_max = real(key, value)?,
        "phi_min" => cfg.ensemble.phi_min = real(key, value)?,
        "dqn_memory" => cfg.dqn.memory = num(key, value)?,
        "dqn_hidden" => cfg.dqn.hidden = num(key, value)?,
        "dqn_gamma" => cfg.dqn.gamma = real(key, value)?,
        "dqn_lr" => cfg.dqn.learning_rate = real(key, value)?,
        "reinforce_lr" => cfg.reinforce.learning_rate = real(key, value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}
