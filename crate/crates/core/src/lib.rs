//! Simulation library for a tilt-rotor quadcopter flown by quaternion-error
//! attitude feedback and an outer PID position loop.
//!
//! Layers, bottom up: [`quat`] (Hamilton quaternions), [`dynamics`] (rigid
//! body + RK4), [`allocation`] (8×8 mixer), [`linearization`] (hover
//! coefficients checked against finite differences), [`attitude`],
//! [`position`] and [`harness`] (scenario configs, closed-loop runs, CSV logs).
//!
//! Runnable entry points live in `examples/`; see the README.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod attitude;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linearization;
pub mod position;
pub mod quat;

pub use error::{Error, Result};
pub use quat::{EulerAngles, Quaternion, Vec3};
