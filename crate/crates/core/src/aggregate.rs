//! Runs a scheduled plan against a machine and sums the actuator loads onto
//! one time grid.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forwarder::ff_arm_power;
use crate::handler::{arm_force_and_power, boom_power, swing_power};
use crate::kinematics::{make_profile, steps_for, Adjustment, MotionProfile};
use crate::machine::MachineParams;
use crate::plan::{Joint, ScheduledPlan, ScheduledTask, TaskKind};
use crate::series::{Component, ComponentLoadSeries, Direction};

/// Grid time of sample `k`, rounded to the nanosecond so exports stay tidy.
pub fn grid_time(k: usize, dt: f64) -> f64 {
    (k as f64 * dt * 1e9).round() / 1e9
}

/// Index of the grid sample nearest to `t`.
pub fn grid_index(t: f64, dt: f64) -> usize {
    (t / dt).round().max(0.0) as usize
}

fn component_of(task: TaskKind) -> Component {
    match task.joint() {
        Some(Joint::Boom) => Component::Boom,
        Some(Joint::Arm) => Component::Arm,
        Some(Joint::Slew) => Component::Swing,
        None => Component::Idle,
    }
}

fn direction_of(task: TaskKind) -> Direction {
    match task {
        TaskKind::BoomLower | TaskKind::ArmLower | TaskKind::ArmLowerMh => Direction::Lower,
        _ => Direction::Lift,
    }
}

/// Output of one task: the load series plus the joint trajectory that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRun {
    pub series: ComponentLoadSeries,
    /// Joint motion over the task window; `None` for wait.
    #[serde(skip)]
    pub profile: Option<MotionProfile>,
}

fn simulate(task: &ScheduledTask, params: &MachineParams, dt: f64) -> Result<TaskRun> {
    let spec = &task.spec;
    if !spec.task.supported_by(params.kind) {
        return Err(Error::UnsupportedTask {
            task: spec.task.to_string(),
            machine: params.kind.to_string(),
        });
    }
    let Some(request) = spec.motion_request(dt) else {
        let len = steps_for(spec.duration, dt);
        return Ok(TaskRun {
            series: ComponentLoadSeries::constant(
                component_of(spec.task),
                dt,
                len,
                params.idle_power_w,
            ),
            profile: None,
        });
    };
    let profile = make_profile(&request)?;
    let theta1 = task.boom_context.unwrap_or(params.default_pose.boom_deg);
    let theta2 = task.arm_context.unwrap_or(params.default_pose.arm_deg);
    let direction = direction_of(spec.task);
    let mut series = match spec.task {
        TaskKind::BoomLift | TaskKind::BoomLower => {
            boom_power(params, &profile, theta2, spec.load, direction)?
        }
        TaskKind::ArmLiftMh | TaskKind::ArmLowerMh => {
            arm_force_and_power(params, theta1, &profile, spec.load, direction)?
        }
        TaskKind::ArmLift | TaskKind::ArmLower => {
            ff_arm_power(params, &profile, theta1, spec.load, direction)?
        }
        TaskKind::Rotate => swing_power(params, &profile, theta1, theta2, spec.load)?,
        TaskKind::Wait => unreachable!("wait has no motion request"),
    };
    debug_assert_eq!(series.component, component_of(spec.task));
    series.truncate(profile.window_len());
    Ok(TaskRun {
        series,
        profile: Some(profile),
    })
}

/// Simulates one scheduled task on a grid of spacing `dt`.
///
/// The series covers the half-open task window, so a 3 s task at 0.01 s
/// yields 300 samples. Failures are tagged with the task.
pub fn simulate_task(task: &ScheduledTask, params: &MachineParams, dt: f64) -> Result<TaskRun> {
    simulate(task, params, dt).map_err(|source| match source {
        e @ Error::UnsupportedTask { .. } => e,
        source => Error::Simulation {
            index: task.index,
            task: task.spec.task.to_string(),
            time_s: task.start,
            source: Box::new(source),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskAnnotation {
    pub index: usize,
    pub repeat: u32,
    pub task: TaskKind,
    pub component: Component,
    pub start_s: f64,
    pub end_s: f64,
    pub adjustment: Adjustment,
    pub peak_power_w: f64,
    pub energy_j: f64,
    pub over_center: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadProfile {
    pub machine: String,
    pub dt: f64,
    pub time: Vec<f64>,
    /// Per-component power on the global grid, zero outside task windows.
    pub components: BTreeMap<Component, Vec<f64>>,
    pub total: Vec<f64>,
    pub annotations: Vec<TaskAnnotation>,
    pub warnings: Vec<String>,
    /// Task results in schedule order, aligned with `annotations`.
    pub runs: Vec<TaskRun>,
}

impl LoadProfile {
    pub fn horizon(&self) -> f64 {
        self.time.last().copied().unwrap_or(0.0)
    }

    pub fn power(&self, component: Component) -> &[f64] {
        &self.components[&component]
    }

    pub fn peak_total(&self) -> f64 {
        self.total.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_energy_j(&self) -> f64 {
        crate::kinematics::integrate_trapezoid(&self.total, self.dt)
    }
}

fn window(task: &ScheduledTask, dt: f64, len: usize) -> (usize, usize) {
    let first = grid_index(task.start, dt);
    (first, first + len)
}

pub fn aggregate(plan: &ScheduledPlan, params: &MachineParams) -> Result<LoadProfile> {
    let dt = plan.dt;
    let runs = plan
        .tasks
        .par_iter()
        .map(|task| simulate_task(task, params, dt))
        .collect::<Result<Vec<_>>>()?;

    let rows = if plan.tasks.is_empty() {
        0
    } else {
        steps_for(plan.horizon(), dt) + 1
    };
    let mut components: BTreeMap<Component, Vec<f64>> = [
        Component::Boom,
        Component::Arm,
        Component::Swing,
        Component::Idle,
    ]
    .into_iter()
    .map(|c| (c, vec![0.0; rows]))
    .collect();

    let mut annotations = Vec::with_capacity(runs.len());
    for (task, run) in plan.tasks.iter().zip(&runs) {
        let (first, _) = window(task, dt, run.series.len());
        let column = components
            .get_mut(&run.series.component)
            .expect("all components allocated");
        for (k, p) in run.series.power_w.iter().enumerate() {
            if let Some(slot) = column.get_mut(first + k) {
                *slot += p;
            }
        }
        annotations.push(TaskAnnotation {
            index: task.index,
            repeat: task.repeat,
            task: task.spec.task,
            component: run.series.component,
            start_s: task.start,
            end_s: task.end(),
            adjustment: task.adjustment,
            peak_power_w: run.series.peak_power(),
            energy_j: run.series.energy_j(),
            over_center: run.series.over_center,
        });
    }

    let mut warnings = Vec::new();
    for (i, (a, ra)) in plan.tasks.iter().zip(&runs).enumerate() {
        for (b, rb) in plan.tasks.iter().zip(&runs).skip(i + 1) {
            let component = ra.series.component;
            if component == Component::Idle || component != rb.series.component {
                continue;
            }
            let (a0, a1) = window(a, dt, ra.series.len());
            let (b0, b1) = window(b, dt, rb.series.len());
            if a0 < b1 && b0 < a1 {
                warnings.push(format!(
                    "tasks #{} `{}` and #{} `{}` drive the {component} at the same time; powers are summed",
                    a.index, a.spec.task, b.index, b.spec.task
                ));
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let total = (0..rows)
        .map(|k| components.values().map(|column| column[k]).sum())
        .collect();
    Ok(LoadProfile {
        machine: plan.machine.clone(),
        dt,
        time: (0..rows).map(|k| grid_time(k, dt)).collect(),
        components,
        total,
        annotations,
        warnings,
        runs,
    })
}
