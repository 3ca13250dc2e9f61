//! Rendering engine and closed-loop simulator for a hybrid haptic display:
//! a 1-DoF rigid platform under the fingertip plus a pneumatic bubble that
//! renders the residual (lump) force.
//!
//! The pipeline runs end to end on plain values:
//!
//! 1. [`recording`] ingests or synthesizes 100 Hz palpation trials.
//! 2. [`characterization`] fits the platform (quadratic) and bubble
//!    (power-law) force models and their inverses.
//! 3. [`segmentation`] splits a trial into pokes with four-phase labels.
//! 4. [`rendering`] turns a trial into a per-tick [`rendering::RenderPlan`]
//!    for one of three strategies (Platform-Only, Hybrid A, Hybrid B).
//! 5. [`simulator`] runs the plan against plant models at 100 Hz using the
//!    controllers in [`control`].
//! 6. [`metrics`] scores tracking, force augmentation and lump detection.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characterization;
pub mod config;
pub mod control;
mod error;
pub mod flags;
pub mod metrics;
pub mod recording;
pub mod reference;
pub mod rendering;
pub mod segmentation;
pub mod simulator;
mod textfmt;

pub use error::{Error, Result};
pub use flags::Flags;

/// Control loop period in seconds (100 Hz).
pub const TICK_S: f64 = 0.01;
