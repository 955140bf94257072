//! Two-layer model-based reinforcement learning.
//!
//! The inner layer ([`tpe`]) wraps one Dyna-style training step of a target
//! controller behind state/action/reward interfaces. The outer layer
//! ([`trainers`], [`ensemble`]) learns how to drive that step online so that
//! fewer real-environment samples are needed.

pub mod controller;
pub mod cyber;
pub mod ensemble;
pub mod envs;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod tpe;
pub mod trainers;

pub use error::{Error, Result};
