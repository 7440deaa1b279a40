//! Building-heating simulator comparing model-free intelligent-P control, PI
//! control and flatness-based feedforward on a two-node RC room model.

pub mod config;
pub mod controllers;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod noise;
pub mod output;
pub mod plant;
pub mod reference;

pub use controllers::{Actuation, ActuatorMode, ControllerConfig, ControllerKind};
pub use engine::{
    comparison_suite, compute_metrics, run, sweep, Metrics, Scenario, SimRecord, TExtProfile, TimeSeries,
};
pub use error::{Error, Result};
pub use plant::{ThermalParams, ThermalState};
pub use reference::{ReferenceMode, Schedule};
