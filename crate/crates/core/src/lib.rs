//! Leg Agility kinematics.
//!
//! Turns thigh-mounted inertial recordings of the seated Leg Agility task
//! into inclination/angular-velocity signals, per-repetition and spectral
//! features, and UPDRS score predictions evaluated by leave-one-out
//! cross-validation.

pub mod dataset;
pub mod error;
pub mod features;
pub mod ml;
pub mod orientation;
pub mod pipeline;
pub mod report;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
