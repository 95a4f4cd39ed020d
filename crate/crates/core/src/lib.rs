//! Bearing-only target localization and circumnavigation.
//!
//! A single-integrator agent measures only the bearing to a target. It
//! estimates the target position and orbits it at a prescribed radius and
//! angular rate. The crate provides the predefined-time estimator/controller
//! pair, three literature baselines, a deterministic RK4 simulator and a
//! layer of numerical checks on the resulting trajectories.
//!
//! ```no_run
//! use botlc::{analysis, sim::Scenario};
//!
//! let scenario = Scenario::load("sv_proposed")?;
//! let traj = scenario.run()?;
//! let config = analysis::MonitorConfig::for_trajectory(&traj, scenario.checks.clone());
//! let report = analysis::invariant_report(&traj, &config);
//! println!("{}", report.to_text());
//! # Ok::<(), botlc::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baselines;
pub mod batch;
pub mod cli;
pub mod controller;
mod error;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod law;
pub mod sim;

pub use error::{Error, Result};
