//! Reactive quadrotor navigation with forward-arc motion primitives.
//!
//! The crate is split into five parts:
//!
//! - [`primitives`]: unicycle arc propagation, smooth reference evaluation
//!   through snap, primitive libraries, stopping primitives and the
//!   committed piecewise schedule.
//! - [`memory`]: a sliding chain of depth frames linked by relative sensor
//!   transforms, answering free-space and nearest-obstacle queries.
//! - [`planner`]: per-round library evaluation, pruning and selection, and
//!   the fixed-rate planning loop with its stop fallback.
//! - [`sim`]: ground-truth worlds, Poisson-disk forests, ray-cast depth
//!   rendering, ideal tracking and collision adjudication.
//! - [`harness`]: single trials, density-by-speed batches and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod harness;
pub mod memory;
pub mod planner;
pub mod primitives;
pub mod sim;

/// Three-vector in meters (or the matching derivative unit).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Proper rigid transform. Used both for poses (`world_from_body`) and for
/// frame-to-frame edges.
pub type Pose = nalgebra::Isometry3<f64>;
