//! Simulation and planning for quadrotor swarms carrying a rigid payload on
//! fixed-length cables.
//!
//! - [`geometry`]: hat/vee maps, attitude errors, SO(3)/S² retraction
//! - [`quadrotor`]: single-vehicle plant, geometric tracking controller, mixer
//! - [`swarm_dynamics`]: coupled payload, cable and vehicle equations of motion
//! - [`config_planner`]: hover formations and minimum fleet size
//! - [`integrator`]: fixed-step RK4 with manifold retraction
//! - [`sim_cli`]: scenario files, CSV output and the command-line front end
//!
//! The inertial frame is z-down: gravity is `+g e3` and thrust acts along
//! `−R e3`.

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config_planner;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod quadrotor;
pub mod sim_cli;
pub mod swarm_dynamics;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Standard gravity used throughout (m/s²).
pub const GRAVITY: f64 = 9.81;
