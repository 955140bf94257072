//! Three-slot ensemble trainer with memory sharing, reference sampling and
//! weight transfer.

mod runner;
mod state;

pub use runner::{Ensemble, EnsembleStepReport, SlotStepReport};
pub use state::{
    accumulate, order_rewards, reference_probability, skewness, Analysis, EnsembleConfig, EnsembleState, StepRecord,
    SLOTS,
};
