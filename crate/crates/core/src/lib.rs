//! Simulation and verification toolkit for Hodgkin-Huxley-Wilson (HHW)
//! neural networks and their Caputo-fractional memristive extension.
//!
//! - [`special`]: Gamma, Mittag-Leffler, fractional Gronwall envelope.
//! - [`model`]: parameter sets, states, vector fields.
//! - [`integrators`]: RK4, Dormand-Prince 5(4), fractional Adams scheme.
//! - [`analysis`]: closed-form constants and trajectory-level checks.

pub mod analysis;
pub mod integrators;
pub mod model;
pub mod sampling;
pub mod special;
pub mod trajectory;

pub use integrators::{integrate, integrate_caputo, integrate_classical, IntegratorKind, IntegratorSpec};
pub use model::{AnyParams, MemristiveParams, ModelKind, ModelParams, NetworkState};
pub use trajectory::{Trajectory, TrajectoryMeta};
