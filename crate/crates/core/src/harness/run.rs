use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, TrainerKind};
use super::eval::evaluate;
use crate::controller::DdpgController;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::tpe::Tpe;
use crate::trainers::{ActionTable, BaselineKind, BaselineTrainer, DqnConfig, DqnTrainer, ReinforceTrainer, Trainer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub tpe_step: usize,
    pub real_samples: usize,
    pub mean_return: f64,
    pub return_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub tpe_step: usize,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub trainer_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub evals: Vec<EvalRecord>,
    pub actions: Vec<ActionRecord>,
    pub tpe_steps: usize,
    pub real_samples_used: usize,
    /// Real samples at the first evaluation reaching the target return.
    pub samples_to_target: Option<usize>,
    /// Steps taken by the training-side real environments.
    pub train_env_steps: u64,
    /// Steps taken by the isolated evaluation environment.
    pub test_env_steps: u64,
}

impl RunOutcome {
    pub fn final_eval(&self) -> Option<&EvalRecord> {
        self.evals.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub tpe_steps: usize,
    pub real_samples_used: usize,
    pub final_mean_return: Option<f64>,
    pub final_return_std: Option<f64>,
    pub samples_to_target: Option<usize>,
    pub versions: BTreeMap<String, String>,
}

enum Driver {
    Single { tpe: Box<Tpe>, trainer: Box<Trainer> },
    Ensemble(Box<Ensemble>),
}

impl Driver {
    fn build(config: &ExperimentConfig, seed: u64, rng: &mut RngStream) -> Result<Self> {
        let tpe_cfg = config.tpe.clone();
        if config.trainer == TrainerKind::Ensemble {
            let dqn = DqnConfig { total_steps: Ensemble::planned_steps(&tpe_cfg), ..config.dqn.clone() };
            let e = Ensemble::for_task(config.task, tpe_cfg, ActionTable::two_level(), dqn, config.ensemble, seed)?;
            return Ok(Driver::Ensemble(Box::new(e)));
        }
        let planned = tpe_cfg.budget_n.saturating_sub(tpe_cfg.init_samples).div_ceil(tpe_cfg.k_real);
        let tpe = Tpe::for_task(config.task, tpe_cfg, seed)?;
        let dqn = |table: ActionTable, rng: &mut RngStream| -> Result<Trainer> {
            let cfg = DqnConfig { total_steps: planned, ..config.dqn.clone() };
            Ok(Trainer::Dqn(DqnTrainer::new(table, cfg, rng)?))
        };
        let trainer = match config.trainer {
            TrainerKind::Dqn | TrainerKind::DqnMem2000 => dqn(ActionTable::two_level(), rng)?,
            TrainerKind::Dqn5 => dqn(ActionTable::five_level(), rng)?,
            TrainerKind::Reinforce => {
                Trainer::Reinforce(ReinforceTrainer::new(ActionTable::two_level(), config.reinforce.clone(), rng)?)
            }
            TrainerKind::Random => {
                Trainer::Baseline(BaselineTrainer::new(BaselineKind::Random, ActionTable::two_level()))
            }
            TrainerKind::Fixed => Trainer::Baseline(
                BaselineTrainer::new(BaselineKind::Fixed, ActionTable::two_level())
                    .with_fixed_action(config.fixed_action),
            ),
            TrainerKind::NoCyber => {
                Trainer::Baseline(BaselineTrainer::new(BaselineKind::NoCyber, ActionTable::two_level()))
            }
            TrainerKind::Ensemble => unreachable!("handled above"),
        };
        Ok(Driver::Single { tpe: Box::new(tpe), trainer: Box::new(trainer) })
    }

    fn is_done(&self) -> bool {
        match self {
            Driver::Single { tpe, .. } => tpe.is_done(),
            Driver::Ensemble(e) => e.is_done(),
        }
    }

    fn real_samples_used(&self) -> usize {
        match self {
            Driver::Single { tpe, .. } => tpe.real_samples_used(),
            Driver::Ensemble(e) => e.real_samples_used(),
        }
    }

    fn train_env_steps(&self) -> u64 {
        match self {
            Driver::Single { tpe, .. } => tpe.real_env().total_steps(),
            Driver::Ensemble(e) => (0..3).map(|i| e.slot(i).real_env().total_steps()).sum(),
        }
    }

    /// The controller that represents the run: the single target controller,
    /// or the best slot's controller for the ensemble.
    fn controller(&self) -> &DdpgController {
        match self {
            Driver::Single { tpe, .. } => tpe.controller(),
            Driver::Ensemble(e) => e.slot(e.best_index()).controller(),
        }
    }

    fn step(&mut self, t: usize, rng: &mut RngStream) -> Result<ActionRecord> {
        match self {
            Driver::Single { tpe, trainer } => {
                let obs = tpe.observation();
                let choice = trainer.select(obs, t, rng)?;
                let report = tpe.step(choice.action)?;
                let reward = f64::from(report.reward);
                trainer.observe(obs, choice, reward, report.observation, rng)?;
                let [a0, a1, a2] = choice.action.as_array();
                Ok(ActionRecord { tpe_step: t + 1, a0, a1, a2, trainer_reward: reward })
            }
            Driver::Ensemble(e) => {
                let report = e.step()?;
                let [a0, a1, a2] = report.slots[0].choice.action.as_array();
                let reward = f64::from(report.record.ranks[0]);
                Ok(ActionRecord { tpe_step: t + 1, a0, a1, a2, trainer_reward: reward })
            }
        }
    }
}

/// Runs one experiment in memory.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut master = RngStream::new(config.seed);
    let tpe_seed = master.fork().seed();
    let mut trainer_rng = master.fork();
    let mut eval_rng = master.fork();
    let mut driver = Driver::build(config, tpe_seed, &mut trainer_rng)?;
    let mut test_env = config.task.make_env();

    let mut evals = Vec::new();
    let mut actions = Vec::new();
    let mut samples_to_target = None;
    let mut t = 0;
    let mut record = |driver: &Driver, t: usize, evals: &mut Vec<EvalRecord>| -> Result<bool> {
        let (mean, std) = evaluate(driver.controller(), test_env.as_mut(), config.eval_episodes, &mut eval_rng)?;
        let real_samples = driver.real_samples_used();
        evals.push(EvalRecord { tpe_step: t, real_samples, mean_return: mean, return_std: std });
        let hit = config.target_return.is_some_and(|target| mean >= target);
        if hit && samples_to_target.is_none() {
            samples_to_target = Some(real_samples);
        }
        Ok(hit)
    };
    let hit = record(&driver, 0, &mut evals)?;
    let stopped = hit && config.stop_at_target;
    while !stopped && !driver.is_done() {
        actions.push(driver.step(t, &mut trainer_rng)?);
        t += 1;
        if t % config.eval_interval == 0 || driver.is_done() {
            let hit = record(&driver, t, &mut evals)?;
            if hit && config.stop_at_target {
                break;
            }
        }
    }
    Ok(RunOutcome {
        config: config.clone(),
        evals,
        actions,
        tpe_steps: t,
        real_samples_used: driver.real_samples_used(),
        samples_to_target,
        train_env_steps: driver.train_env_steps(),
        test_env_steps: test_env.total_steps(),
    })
}

fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes `learning_curve.csv`, `actions.csv`, `config.txt` and
/// `manifest.json` into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path, started_unix: f64) -> Result<RunManifest> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("learning_curve.csv")).map_err(csv_error)?;
    w.write_record(["tpe_step", "real_samples", "mean_return", "return_std"]).map_err(csv_error)?;
    for r in &outcome.evals {
        w.serialize((r.tpe_step, r.real_samples, r.mean_return, r.return_std)).map_err(csv_error)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("actions.csv")).map_err(csv_error)?;
    w.write_record(["tpe_step", "a0", "a1", "a2", "trainer_reward"]).map_err(csv_error)?;
    for r in &outcome.actions {
        w.serialize((r.tpe_step, r.a0, r.a1, r.a2, r.trainer_reward)).map_err(csv_error)?;
    }
    w.flush()?;
    std::fs::write(dir.join("config.txt"), outcome.config.to_config_text())?;

    let versions = ["numerics", "envs", "cyber", "controller", "tpe", "trainers", "ensemble", "harness"]
        .iter()
        .map(|m| (m.to_string(), env!("CARGO_PKG_VERSION").to_string()))
        .collect();
    let last = outcome.final_eval();
    let manifest = RunManifest {
        config: outcome.config.clone(),
        started_unix,
        finished_unix: now_unix(),
        tpe_steps: outcome.tpe_steps,
        real_samples_used: outcome.real_samples_used,
        final_mean_return: last.map(|e| e.mean_return),
        final_return_std: last.map(|e| e.return_std),
        samples_to_target: outcome.samples_to_target,
        versions,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}

/// Runs one experiment and writes its artifacts to `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    let started = now_unix();
    let outcome = execute(config)?;
    write_outputs(&outcome, &config.output_dir, started)
}

/// Runs one replica per seed, each in `output_dir/seed_<s>`, using up to
/// `jobs` threads.
pub fn sweep(config: &ExperimentConfig, seeds: RangeInclusive<u64>, jobs: usize) -> Result<Vec<RunManifest>> {
    let configs: Vec<ExperimentConfig> = seeds
        .map(|seed| ExperimentConfig {
            seed,
            output_dir: config.output_dir.join(format!("seed_{seed}")),
            ..config.clone()
        })
        .collect();
    let jobs = jobs.max(1);
    let mut results: Vec<Option<Result<RunManifest>>> = vec![None; configs.len()];
    for (chunk_cfg, chunk_out) in configs.chunks(jobs).zip(results.chunks_mut(jobs)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_cfg.iter().map(|c| s.spawn(move || run_experiment(c))).collect();
            for (slot, h) in chunk_out.iter_mut().zip(handles) {
                *slot = Some(h.join().unwrap_or_else(|_| Err(Error::State("replica panicked".into()))));
            }
        });
    }
    results.into_iter().map(|r| r.expect("every replica ran")).collect()
}

/// Parses `a..b` (inclusive) or a single seed.
pub fn parse_seed_range(text: &str) -> Result<RangeInclusive<u64>> {
    let bad = || Error::Config { line: 0, message: format!("malformed seed range `{text}`") };
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let s = text.trim().parse().map_err(|_| bad())?;
            (s, s)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

/// Reads every `learning_curve.csv` in `dir` and its immediate
/// subdirectories.
pub fn read_learning_curves(dir: &Path) -> Result<Vec<(String, Vec<EvalRecord>)>> {
    let mut files: Vec<PathBuf> = Vec::new();
    let direct = dir.join("learning_curve.csv");
    if direct.is_file() {
        files.push(direct);
    }
    let mut subdirs: Vec<PathBuf> =
        std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    subdirs.sort();
    files.extend(subdirs.into_iter().map(|d| d.join("learning_curve.csv")).filter(|p| p.is_file()));
    let mut curves = Vec::new();
    for f in files {
        let label = f
            .parent()
            .and_then(|p| p.file_name())
            .map_or_else(|| "run".to_string(), |n| n.to_string_lossy().into_owned());
        let mut reader = csv::Reader::from_path(&f).map_err(csv_error)?;
        let rows = reader.deserialize().collect::<std::result::Result<Vec<EvalRecord>, _>>().map_err(csv_error)?;
        curves.push((label, rows));
    }
    Ok(curves)
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidArgument(_) => 2,
        Error::Numeric(_) => 3,
        _ => 1,
    }
}
