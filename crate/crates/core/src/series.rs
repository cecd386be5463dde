use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kinematics::integrate_trapezoid;

/// Actuator a load series belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Boom,
    Arm,
    Swing,
    /// Wait tasks; carries the machine idle power.
    Idle,
}

impl Component {
    pub const ACTUATORS: [Component; 3] = [Component::Boom, Component::Arm, Component::Swing];

    pub fn name(&self) -> &'static str {
        match self {
            Component::Boom => "boom",
            Component::Arm => "arm",
            Component::Swing => "swing",
            Component::Idle => "idle",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Lift,
    Lower,
}

/// Force, cylinder speed, torque and power of one actuator over one task.
///
/// Times are local to the task and uniformly spaced by `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLoadSeries {
    pub component: Component,
    pub dt: f64,
    pub time: Vec<f64>,
    /// Cylinder force magnitude, N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_n: Option<Vec<f64>>,
    /// Cylinder extension rate, m/s (signed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyl_velocity_mps: Option<Vec<f64>>,
    /// Slewing torque, N·m (signed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque_nm: Option<Vec<f64>>,
    /// Actuator power magnitude, W.
    pub power_w: Vec<f64>,
    /// Set when the gravity moment changed sign somewhere in the task.
    #[serde(default)]
    pub over_center: bool,
}

impl ComponentLoadSeries {
    /// Constant-power series of `len` samples.
    pub fn constant(component: Component, dt: f64, len: usize, power_w: f64) -> Self {
        ComponentLoadSeries {
            component,
            dt,
            time: (0..len).map(|k| k as f64 * dt).collect(),
            force_n: None,
            cyl_velocity_mps: None,
            torque_nm: None,
            power_w: vec![power_w; len],
            over_center: false,
        }
    }

    pub fn len(&self) -> usize {
        self.power_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power_w.is_empty()
    }

    pub fn peak_power(&self) -> f64 {
        self.power_w.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the first sample attaining the peak power.
    pub fn peak_index(&self) -> Option<usize> {
        let peak = self.peak_power();
        self.power_w.iter().position(|&p| p == peak)
    }

    /// Trapezoidal-rule energy, J.
    pub fn energy_j(&self) -> f64 {
        integrate_trapezoid(&self.power_w, self.dt)
    }

    /// Keeps the first `len` samples of every channel.
    pub fn truncate(&mut self, len: usize) {
        self.time.truncate(len);
        self.power_w.truncate(len);
        for channel in [
            &mut self.force_n,
            &mut self.cyl_velocity_mps,
            &mut self.torque_nm,
        ]
        .into_iter()
        .flatten()
        {
            channel.truncate(len);
        }
    }
}
