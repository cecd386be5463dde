//! Task-plan documents: parsing, timeline resolution and validation.
//!
//! A plan is a JSON document:
//!
//! ```json
//! {
//!   "machine": "forest_forwarder",
//!   "dt_s": 0.01,
//!   "task_list": [
//!     {"task": "boom_lower", "task_repeats": 1,
//!      "params": {"time_ini": 0, "duration": 3, "value_ini": 65, "value_fin": 30,
//!                 "velocity_max": 8, "arm_fin_ang": 120}},
//!     {"task": "wait", "params": {"time_ini": "append", "duration": 3}}
//!   ]
//! }
//! ```
//!
//! `time_ini` is an absolute start in seconds, `"append"` (start when the
//! previous entry ends) or `"simultan"` (start together with the previous
//! entry). Angles are degrees, velocities deg/s, loads kg.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kinematics::{feasible_parameters, Adjustment, MotionRequest};
use crate::machine::{AngleRange, MachineKind, MachineParams};

pub const DEFAULT_DT_S: f64 = 0.01;

/// Combined ramp share used when a task omits `"ramp %"`.
pub const DEFAULT_RAMP_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    BoomLift,
    BoomLower,
    ArmLift,
    ArmLower,
    ArmLiftMh,
    ArmLowerMh,
    Rotate,
    Wait,
}

/// Joint a task moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Joint {
    Boom,
    Arm,
    Slew,
}

impl TaskKind {
    pub const ALL: [TaskKind; 8] = [
        TaskKind::BoomLift,
        TaskKind::BoomLower,
        TaskKind::ArmLift,
        TaskKind::ArmLower,
        TaskKind::ArmLiftMh,
        TaskKind::ArmLowerMh,
        TaskKind::Rotate,
        TaskKind::Wait,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::BoomLift => "boom_lift",
            TaskKind::BoomLower => "boom_lower",
            TaskKind::ArmLift => "arm_lift",
            TaskKind::ArmLower => "arm_lower",
            TaskKind::ArmLiftMh => "arm_lift_mh",
            TaskKind::ArmLowerMh => "arm_lower_mh",
            TaskKind::Rotate => "rotate",
            TaskKind::Wait => "wait",
        }
    }

    pub fn joint(&self) -> Option<Joint> {
        match self {
            TaskKind::BoomLift | TaskKind::BoomLower => Some(Joint::Boom),
            TaskKind::ArmLift | TaskKind::ArmLower | TaskKind::ArmLiftMh | TaskKind::ArmLowerMh => {
                Some(Joint::Arm)
            }
            TaskKind::Rotate => Some(Joint::Slew),
            TaskKind::Wait => None,
        }
    }

    pub fn supported_by(&self, kind: MachineKind) -> bool {
        match self {
            TaskKind::ArmLift | TaskKind::ArmLower => kind == MachineKind::ForestForwarder,
            TaskKind::ArmLiftMh | TaskKind::ArmLowerMh => kind == MachineKind::MaterialHandler,
            _ => true,
        }
    }

    /// Context keys a task of this kind may carry.
    pub fn context_keys(&self) -> &'static [&'static str] {
        match self.joint() {
            Some(Joint::Boom) => &["arm_fin_ang"],
            Some(Joint::Arm) => &["boom_fin_ang"],
            Some(Joint::Slew) => &["ang_arm", "ang_boom"],
            None => &[],
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            TaskKind::BoomLift => "raise the boom (both machines)",
            TaskKind::BoomLower => "lower the boom (both machines)",
            TaskKind::ArmLift => "raise the forwarder crane arm",
            TaskKind::ArmLower => "lower the forwarder crane arm",
            TaskKind::ArmLiftMh => "raise the material-handler arm",
            TaskKind::ArmLowerMh => "lower the material-handler arm",
            TaskKind::Rotate => "slew the upper carriage (both machines)",
            TaskKind::Wait => "idle for the given duration",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeIni {
    At(f64),
    Append,
    Simultan,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawTimeIni {
    Number(f64),
    Symbol(String),
}

impl Serialize for TimeIni {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            TimeIni::At(t) => RawTimeIni::Number(t),
            TimeIni::Append => RawTimeIni::Symbol("append".into()),
            TimeIni::Simultan => RawTimeIni::Symbol("simultan".into()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeIni {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match RawTimeIni::deserialize(deserializer)? {
            RawTimeIni::Number(t) => Ok(TimeIni::At(t)),
            RawTimeIni::Symbol(s) if s == "append" => Ok(TimeIni::Append),
            RawTimeIni::Symbol(s) if s == "simultan" => Ok(TimeIni::Simultan),
            RawTimeIni::Symbol(s) => Err(serde::de::Error::custom(format!(
                "time_ini must be a number, \"append\" or \"simultan\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    time_ini: TimeIni,
    duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value_ini: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value_fin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    velocity_max: Option<f64>,
    #[serde(rename = "ramp %", default, skip_serializing_if = "Option::is_none")]
    ramp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    load: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boom_fin_ang: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arm_fin_ang: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ang_arm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ang_boom: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    task_repeats: Option<u32>,
    params: RawParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    machine: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dt_s: Option<f64>,
    task_list: Vec<RawTask>,
}

/// One validated plan entry.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub task: TaskKind,
    pub repeats: u32,
    pub time_ini: TimeIni,
    pub duration: f64,
    pub value_ini: Option<f64>,
    pub value_fin: Option<f64>,
    pub velocity_max: Option<f64>,
    /// Combined ramp share as written; `None` means [`DEFAULT_RAMP_FRACTION`].
    pub ramp_fraction: Option<f64>,
    pub load: f64,
    pub boom_fin_ang: Option<f64>,
    pub arm_fin_ang: Option<f64>,
    pub ang_arm: Option<f64>,
    pub ang_boom: Option<f64>,
}

impl TaskSpec {
    pub fn wait(time_ini: TimeIni, duration: f64) -> Self {
        TaskSpec {
            task: TaskKind::Wait,
            repeats: 1,
            time_ini,
            duration,
            value_ini: None,
            value_fin: None,
            velocity_max: None,
            ramp_fraction: None,
            load: 0.0,
            boom_fin_ang: None,
            arm_fin_ang: None,
            ang_arm: None,
            ang_boom: None,
        }
    }

    pub fn motion(
        task: TaskKind,
        time_ini: TimeIni,
        duration: f64,
        from: f64,
        to: f64,
        velocity_max: f64,
    ) -> Self {
        TaskSpec {
            task,
            value_ini: Some(from),
            value_fin: Some(to),
            velocity_max: Some(velocity_max),
            ..TaskSpec::wait(time_ini, duration)
        }
    }

    pub fn ramp(&self) -> f64 {
        self.ramp_fraction.unwrap_or(DEFAULT_RAMP_FRACTION)
    }

    /// Kinematic request of a motion task; `None` for wait.
    pub fn motion_request(&self, dt: f64) -> Option<MotionRequest> {
        match (self.value_ini, self.value_fin, self.velocity_max) {
            (Some(from), Some(to), Some(vmax)) if self.task != TaskKind::Wait => Some(
                MotionRequest::angular(from, to, self.duration, vmax, self.ramp(), dt),
            ),
            _ => None,
        }
    }

    fn context_pairs(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("boom_fin_ang", self.boom_fin_ang),
            ("arm_fin_ang", self.arm_fin_ang),
            ("ang_arm", self.ang_arm),
            ("ang_boom", self.ang_boom),
        ]
    }

    fn from_raw(index: usize, raw: RawTask) -> Result<Self> {
        let task = raw.task;
        let p = raw.params;
        let fail = |msg: String| Err(Error::InvalidPlan(format!("task #{index} `{task}`: {msg}")));

        let repeats = raw.task_repeats.unwrap_or(1);
        if repeats == 0 {
            return fail("task_repeats must be at least 1".into());
        }
        if let TimeIni::At(t) = p.time_ini {
            if !(t.is_finite() && t >= 0.0) {
                return fail(format!("time_ini must be >= 0, got {t}"));
            }
        }
        if !(p.duration.is_finite() && p.duration > 0.0) {
            return fail(format!("duration must be positive, got {}", p.duration));
        }

        let spec = TaskSpec {
            task,
            repeats,
            time_ini: p.time_ini,
            duration: p.duration,
            value_ini: p.value_ini,
            value_fin: p.value_fin,
            velocity_max: p.velocity_max,
            ramp_fraction: p.ramp,
            load: p.load.unwrap_or(0.0),
            boom_fin_ang: p.boom_fin_ang,
            arm_fin_ang: p.arm_fin_ang,
            ang_arm: p.ang_arm,
            ang_boom: p.ang_boom,
        };

        if task == TaskKind::Wait {
            let extra: Vec<&str> = [
                ("value_ini", p.value_ini.is_some()),
                ("value_fin", p.value_fin.is_some()),
                ("velocity_max", p.velocity_max.is_some()),
                ("ramp %", p.ramp.is_some()),
                ("load", p.load.is_some()),
            ]
            .into_iter()
            .filter_map(|(k, set)| set.then_some(k))
            .chain(
                spec.context_pairs()
                    .into_iter()
                    .filter_map(|(k, v)| v.map(|_| k)),
            )
            .collect();
            if !extra.is_empty() {
                return fail(format!(
                    "wait tasks take only time_ini and duration (found {})",
                    extra.join(", ")
                ));
            }
            return Ok(spec);
        }

        for (key, value) in [
            ("value_ini", p.value_ini),
            ("value_fin", p.value_fin),
            ("velocity_max", p.velocity_max),
        ] {
            match value {
                None => return fail(format!("missing required parameter `{key}`")),
                Some(v) if !v.is_finite() => return fail(format!("`{key}` must be finite")),
                Some(_) => {}
            }
        }
        let vmax = p.velocity_max.unwrap_or_default();
        if vmax <= 0.0 {
            return fail(format!("velocity_max must be positive, got {vmax}"));
        }
        if let Some(r) = p.ramp {
            if !(r > 0.0 && r < 1.0) {
                return fail(format!("\"ramp %\" must lie in (0, 1), got {r}"));
            }
        }
        if !(spec.load.is_finite() && spec.load >= 0.0) {
            return fail(format!("load must be >= 0, got {}", spec.load));
        }
        let allowed = task.context_keys();
        for (key, value) in spec.context_pairs() {
            if let Some(v) = value {
                if !allowed.contains(&key) {
                    return fail(format!("`{key}` is not a parameter of this task"));
                }
                if !v.is_finite() {
                    return fail(format!("`{key}` must be finite"));
                }
            }
        }
        Ok(spec)
    }

    fn to_raw(&self) -> RawTask {
        let is_wait = self.task == TaskKind::Wait;
        RawTask {
            task: self.task,
            task_repeats: Some(self.repeats),
            params: RawParams {
                time_ini: self.time_ini,
                duration: self.duration,
                value_ini: self.value_ini,
                value_fin: self.value_fin,
                velocity_max: self.velocity_max,
                ramp: self.ramp_fraction,
                load: (!is_wait).then_some(self.load),
                boom_fin_ang: self.boom_fin_ang,
                arm_fin_ang: self.arm_fin_ang,
                ang_arm: self.ang_arm,
                ang_boom: self.ang_boom,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanDocument {
    pub machine: String,
    pub dt: f64,
    pub tasks: Vec<TaskSpec>,
}

impl PlanDocument {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        parse_plan(&crate::io::read_text(path.as_ref())?)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = RawPlan {
            machine: self.machine.clone(),
            dt_s: Some(self.dt),
            task_list: self.tasks.iter().map(TaskSpec::to_raw).collect(),
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }
}

pub fn parse_plan(text: &str) -> Result<PlanDocument> {
    let raw: RawPlan = serde_json::from_str(text).map_err(Error::from_json)?;
    let dt = raw.dt_s.unwrap_or(DEFAULT_DT_S);
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidPlan(format!(
            "dt_s must be positive, got {dt}"
        )));
    }
    let tasks = raw
        .task_list
        .into_iter()
        .enumerate()
        .map(|(i, t)| TaskSpec::from_raw(i, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanDocument {
        machine: raw.machine,
        dt,
        tasks,
    })
}

/// A plan entry copy placed on the absolute timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledTask {
    /// Position of the originating entry in the task list.
    pub index: usize,
    /// Which copy of a repeated entry this is, from 0.
    pub repeat: u32,
    pub spec: TaskSpec,
    pub start: f64,
    pub effective_duration: f64,
    pub adjustment: Adjustment,
    /// Boom angle held during arm and rotate tasks, resolved from the task or
    /// from the last task that positioned the boom.
    pub boom_context: Option<f64>,
    /// Arm angle held during boom and rotate tasks.
    pub arm_context: Option<f64>,
}

impl ScheduledTask {
    pub fn end(&self) -> f64 {
        self.start + self.effective_duration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledPlan {
    pub machine: String,
    pub dt: f64,
    pub tasks: Vec<ScheduledTask>,
}

impl ScheduledPlan {
    pub fn horizon(&self) -> f64 {
        self.tasks
            .iter()
            .map(ScheduledTask::end)
            .fold(0.0, f64::max)
    }
}

/// Last known joint angles while walking the task list.
#[derive(Debug, Default, Clone, Copy)]
struct PoseTracker {
    boom: Option<f64>,
    arm: Option<f64>,
}

impl PoseTracker {
    fn context(&mut self, spec: &TaskSpec) -> (Option<f64>, Option<f64>) {
        let boom = match spec.task.joint() {
            Some(Joint::Arm) => spec.boom_fin_ang.or(self.boom),
            Some(Joint::Slew) => spec.ang_boom.or(self.boom),
            _ => None,
        };
        let arm = match spec.task.joint() {
            Some(Joint::Boom) => spec.arm_fin_ang.or(self.arm),
            Some(Joint::Slew) => spec.ang_arm.or(self.arm),
            _ => None,
        };
        self.boom = boom.or(self.boom);
        self.arm = arm.or(self.arm);
        match spec.task.joint() {
            Some(Joint::Boom) => self.boom = spec.value_fin,
            Some(Joint::Arm) => self.arm = spec.value_fin,
            _ => {}
        }
        (boom, arm)
    }
}

pub fn resolve_timeline(doc: &PlanDocument) -> Result<ScheduledPlan> {
    let mut tasks = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    let mut pose = PoseTracker::default();
    for (index, spec) in doc.tasks.iter().enumerate() {
        let first_start = match (spec.time_ini, previous) {
            (TimeIni::At(t), _) => t,
            (TimeIni::Append, Some((_, end))) => end,
            (TimeIni::Simultan, Some((start, _))) => start,
            (symbolic, None) => {
                return Err(Error::InvalidPlan(format!(
                    "task #0 `{}` cannot use time_ini {:?}: there is no previous task",
                    spec.task, symbolic
                )))
            }
        };
        if !(first_start >= 0.0) {
            return Err(Error::InvalidPlan(format!(
                "internal: task #{index} resolved to negative start {first_start}"
            )));
        }
        let mut start = first_start;
        for repeat in 0..spec.repeats {
            let (effective_duration, adjustment) = match spec.motion_request(doc.dt) {
                Some(req) => {
                    let (duration, _, adjustment) = feasible_parameters(&req).map_err(|e| {
                        Error::InvalidPlan(format!("task #{index} `{}`: {e}", spec.task))
                    })?;
                    (duration, adjustment)
                }
                None => (spec.duration, Adjustment::None),
            };
            let (boom_context, arm_context) = pose.context(spec);
            let task = ScheduledTask {
                index,
                repeat,
                spec: spec.clone(),
                start,
                effective_duration,
                adjustment,
                boom_context,
                arm_context,
            };
            start = task.end();
            tasks.push(task);
        }
        previous = Some((first_start, start));
    }
    Ok(ScheduledPlan {
        machine: doc.machine.clone(),
        dt: doc.dt,
        tasks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub task_index: Option<usize>,
    pub task: Option<TaskKind>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match (self.task_index, self.task) {
            (Some(i), Some(t)) => write!(f, "{level}: task #{i} `{t}`: {}", self.message),
            _ => write!(f, "{level}: {}", self.message),
        }
    }
}

fn limit_for(params: &MachineParams, joint: Joint) -> Option<(AngleRange, &'static str)> {
    match joint {
        Joint::Boom => params.limits.boom.map(|r| (r, "boom")),
        Joint::Arm => params.limits.arm.map(|r| (r, "arm")),
        Joint::Slew => params.limits.rotate.map(|r| (r, "rotation")),
    }
}

/// Limit warnings, unsupported-task errors and a note for every feasibility adjustment.
pub fn validate_plan(plan: &ScheduledPlan, params: &MachineParams) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if let Ok(kind) =
        serde_json::from_value::<MachineKind>(serde_json::Value::String(plan.machine.clone()))
    {
        if kind != params.kind {
            out.push(Diagnostic {
                severity: Severity::Error,
                task_index: None,
                task: None,
                message: format!(
                    "plan targets a {kind} but the machine file describes a {}",
                    params.kind
                ),
            });
        }
    }
    for task in plan.tasks.iter().filter(|t| t.repeat == 0) {
        let spec = &task.spec;
        let mut push = |severity, message: String| {
            out.push(Diagnostic {
                severity,
                task_index: Some(task.index),
                task: Some(spec.task),
                message,
            })
        };
        if !spec.task.supported_by(params.kind) {
            push(
                Severity::Error,
                format!("not supported by a {} machine", params.kind),
            );
        }
        let mut checks = Vec::new();
        if let Some(joint) = spec.task.joint() {
            checks.extend([
                (joint, "value_ini", spec.value_ini),
                (joint, "value_fin", spec.value_fin),
            ]);
        }
        checks.extend([
            (Joint::Arm, "arm_fin_ang", spec.arm_fin_ang),
            (Joint::Boom, "boom_fin_ang", spec.boom_fin_ang),
            (Joint::Arm, "ang_arm", spec.ang_arm),
            (Joint::Boom, "ang_boom", spec.ang_boom),
        ]);
        for (joint, key, value) in checks {
            if let (Some(v), Some((range, name))) = (value, limit_for(params, joint)) {
                if !range.contains(v) {
                    push(
                        Severity::Warning,
                        format!(
                            "{key} = {v} deg is outside the {name} limits [{}, {}]",
                            range.min_deg, range.max_deg
                        ),
                    );
                }
            }
        }
        match task.adjustment {
            Adjustment::None => {}
            Adjustment::DurationIncreased { requested_s, effective_s } => push(
                Severity::Info,
                format!("duration will be increased from {requested_s} s to {effective_s:.4} s to reach the end position"),
            ),
            Adjustment::VelocityReduced { requested, effective } => push(
                Severity::Info,
                format!("velocity will be reduced from {requested} deg/s to {effective:.4} deg/s to match the duration"),
            ),
        }
    }
    out
}
