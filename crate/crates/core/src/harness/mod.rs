//! Experiment configuration, run loop, evaluation and artifacts.

mod config;
mod eval;
mod plot;
mod run;

pub use config::{load_config, obs_mode_name, parse_config, ExperimentConfig, TrainerKind};
pub use eval::{evaluate, evaluate_policy};
pub use plot::{plot, render_svg};
pub use run::{
    execute, exit_code, parse_seed_range, read_learning_curves, run_experiment, sweep, write_outputs, ActionRecord,
    EvalRecord, RunManifest, RunOutcome,
};
