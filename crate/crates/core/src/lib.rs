//! Bottom-up load profile generator for non-road mobile machinery.
//!
//! A task plan ([`plan`]) is resolved onto an absolute timeline, every task
//! is turned into a trapezoidal joint trajectory ([`kinematics`]), the
//! quasi-static mechanics of the machine ([`handler`], [`forwarder`]) turn
//! the trajectory into actuator force and power, and [`aggregate`] sums the
//! actuator series into a machine-level load profile.

// `!(x > 0.0)` is used throughout so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod error;
pub mod export;
pub mod forwarder;
pub mod handler;
mod io;
pub mod kinematics;
pub mod machine;
pub mod plan;
pub mod scaling;
pub mod series;

pub use aggregate::{aggregate, simulate_task, LoadProfile, TaskAnnotation};
pub use error::{Error, Result};
pub use kinematics::{make_profile, Adjustment, MotionProfile, MotionRequest};
pub use machine::{MachineKind, MachineParams};
pub use plan::{
    parse_plan, resolve_timeline, validate_plan, PlanDocument, ScheduledPlan, TaskKind,
};
pub use series::{Component, ComponentLoadSeries, Direction};

/// Parses, schedules and simulates a plan in one go.
pub fn run_plan(plan: &PlanDocument, machine: &MachineParams) -> Result<LoadProfile> {
    let scheduled = resolve_timeline(plan)?;
    aggregate(&scheduled, machine)
}
