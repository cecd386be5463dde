//! Trapezoidal motion profiles for a single degree of freedom.
//!
//! A profile accelerates uniformly on `[t0, t1)`, holds its plateau velocity
//! on `[t1, t2)` and decelerates uniformly on `[t2, t3]`. The ramp fraction
//! `r` is the *combined* share of the duration spent ramping, split equally
//! between the two ramps, so `t1 - t0 = t3 - t2 = r * T / 2`.
//!
//! The requested duration, plateau velocity and displacement over-determine
//! the trapezoid. Before sampling, the request is made feasible in one of two
//! ways: when the displacement cannot be covered at the requested velocity
//! the duration is stretched ([`adjust_duration`]), otherwise the plateau
//! velocity is reduced until the displacement is met exactly
//! ([`adjust_velocity`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide that a request is already exactly feasible.
const FEASIBILITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Degrees, deg/s, deg/s².
    Angular,
    /// Metres, m/s, m/s².
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionRequest {
    pub start: f64,
    pub end: f64,
    /// Requested duration in seconds.
    pub duration: f64,
    /// Requested plateau velocity (always positive).
    pub vmax: f64,
    /// Combined ramp share of the duration, in (0, 1).
    pub ramp_fraction: f64,
    pub dt: f64,
    pub unit: Unit,
}

impl MotionRequest {
    pub fn angular(
        start: f64,
        end: f64,
        duration: f64,
        vmax: f64,
        ramp_fraction: f64,
        dt: f64,
    ) -> Self {
        MotionRequest {
            start,
            end,
            duration,
            vmax,
            ramp_fraction,
            dt,
            unit: Unit::Angular,
        }
    }

    pub fn linear(
        start: f64,
        end: f64,
        duration: f64,
        vmax: f64,
        ramp_fraction: f64,
        dt: f64,
    ) -> Self {
        MotionRequest {
            unit: Unit::Linear,
            ..Self::angular(start, end, duration, vmax, ramp_fraction, dt)
        }
    }

    /// Unsigned distance to travel.
    pub fn displacement(&self) -> f64 {
        (self.end - self.start).abs()
    }

    /// Share of `vmax * duration` a trapezoid with this ramp fraction covers.
    fn area_factor(&self) -> f64 {
        1.0 - self.ramp_fraction / 2.0
    }

    /// Distance covered at the requested velocity within the requested duration.
    pub fn reachable_displacement(&self) -> f64 {
        self.vmax * self.duration * self.area_factor()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("start", self.start),
            ("end", self.end),
            ("duration", self.duration),
            ("vmax", self.vmax),
            ("ramp_fraction", self.ramp_fraction),
            ("dt", self.dt),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidMotion(format!("{name} is not finite")));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidMotion(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.duration <= 0.0 {
            return Err(Error::InvalidMotion(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.vmax <= 0.0 {
            return Err(Error::InvalidMotion(format!(
                "vmax must be positive, got {}",
                self.vmax
            )));
        }
        if !(self.ramp_fraction > 0.0 && self.ramp_fraction < 1.0) {
            return Err(Error::InvalidMotion(format!(
                "ramp fraction must lie in (0, 1), got {}",
                self.ramp_fraction
            )));
        }
        Ok(())
    }
}

/// Which feasibility rule fired for a request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adjustment {
    None,
    DurationIncreased { requested_s: f64, effective_s: f64 },
    VelocityReduced { requested: f64, effective: f64 },
}

impl Adjustment {
    pub fn is_none(&self) -> bool {
        matches!(self, Adjustment::None)
    }
}

fn exceeds(a: f64, b: f64) -> bool {
    a - b > FEASIBILITY_RTOL * a.abs().max(b.abs())
}

/// Duration needed to cover the displacement at the requested velocity.
///
/// Returns the requested duration unchanged unless the displacement is out of
/// reach at `(vmax, ramp_fraction, duration)`.
pub fn adjust_duration(req: &MotionRequest) -> f64 {
    let s = req.displacement();
    if exceeds(s, req.reachable_displacement()) {
        s / (req.vmax * req.area_factor())
    } else {
        req.duration
    }
}

/// Plateau velocity that covers the displacement exactly in the requested duration.
///
/// Returns the requested velocity unchanged unless that velocity would
/// overshoot the displacement.
pub fn adjust_velocity(req: &MotionRequest) -> f64 {
    let required = req.displacement() / (req.duration * req.area_factor());
    if exceeds(req.vmax, required) {
        required
    } else {
        req.vmax
    }
}

/// Resolves a request into `(duration, plateau velocity, adjustment)`.
///
/// Exactly one rule applies. A zero-displacement request stays put with a
/// zero plateau and is reported as unadjusted.
pub fn feasible_parameters(req: &MotionRequest) -> Result<(f64, f64, Adjustment)> {
    req.validate()?;
    let s = req.displacement();
    if s == 0.0 {
        return Ok((req.duration, 0.0, Adjustment::None));
    }
    let reachable = req.reachable_displacement();
    if exceeds(s, reachable) {
        let t_new = adjust_duration(req);
        Ok((
            t_new,
            req.vmax,
            Adjustment::DurationIncreased {
                requested_s: req.duration,
                effective_s: t_new,
            },
        ))
    } else if exceeds(reachable, s) {
        let v_new = adjust_velocity(req);
        Ok((
            req.duration,
            v_new,
            Adjustment::VelocityReduced {
                requested: req.vmax,
                effective: v_new,
            },
        ))
    } else {
        Ok((req.duration, req.vmax, Adjustment::None))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub dt: f64,
    pub start: f64,
    pub end: f64,
    pub unit: Unit,
    pub effective_vmax: f64,
    pub effective_duration: f64,
    pub adjustment: Adjustment,
    /// Samples at `t0 + k * dt`; the last one is clamped to `t3`.
    pub samples: Vec<Sample>,
}

impl MotionProfile {
    fn direction(&self) -> f64 {
        if self.end < self.start {
            -1.0
        } else {
            1.0
        }
    }

    /// The three closed-form distance branches (ramp-up, plateau, ramp-down)
    /// evaluated at `t`, whichever phase `t` falls in.
    pub fn distance_branches(&self, t: f64) -> [f64; 3] {
        let (t0, t1, t2, t3, v) = (self.t0, self.t1, self.t2, self.t3, self.effective_vmax);
        let ramp = t3 - t2;
        [
            v * (t - t0).powi(2) / (2.0 * (t1 - t0)),
            v * (t - (t1 + t0) / 2.0),
            v * ((-t * t / 2.0 + t * t3) / ramp
                + (t2 * t2 / 2.0 - t2 * t3) / ramp
                + (t2 - t0) / 2.0
                + (t2 - t1) / 2.0),
        ]
    }

    /// Unsigned distance travelled by time `t` (closed form, piecewise quadratic–linear–quadratic).
    fn distance_at(&self, t: f64) -> f64 {
        let [up, plateau, down] = self.distance_branches(t);
        if t <= self.t0 {
            0.0
        } else if t < self.t1 {
            up
        } else if t < self.t2 {
            plateau
        } else if t < self.t3 {
            down
        } else {
            let v = self.effective_vmax;
            v * (self.t2 - (self.t1 + self.t0) / 2.0) + v * (self.t3 - self.t2) / 2.0
        }
    }

    pub fn position_at(&self, t: f64) -> f64 {
        if t >= self.t3 {
            return self.end;
        }
        self.start + self.direction() * self.distance_at(t)
    }

    pub fn velocity_at(&self, t: f64) -> f64 {
        let v = self.effective_vmax;
        let speed = if t <= self.t0 || t >= self.t3 {
            0.0
        } else if t < self.t1 {
            v * (t - self.t0) / (self.t1 - self.t0)
        } else if t < self.t2 {
            v
        } else {
            v * (self.t3 - t) / (self.t3 - self.t2)
        };
        self.direction() * speed
    }

    pub fn acceleration_at(&self, t: f64) -> f64 {
        let a = self.acceleration_magnitude();
        let value = if t < self.t0 || t > self.t3 {
            0.0
        } else if t < self.t1 {
            a
        } else if t < self.t2 {
            0.0
        } else {
            -a
        };
        self.direction() * value
    }

    pub fn acceleration_magnitude(&self) -> f64 {
        self.effective_vmax / (self.t1 - self.t0)
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.position).collect()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.velocity).collect()
    }

    pub fn accelerations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.acceleration).collect()
    }

    /// Number of samples strictly before `t3` on the uniform grid, i.e. the
    /// length of the half-open window `[t0, t3)` the profile occupies in a plan.
    pub fn window_len(&self) -> usize {
        self.samples.len() - 1
    }
}

/// Number of `dt` steps needed to reach `duration`, tolerant of rounding noise.
pub fn steps_for(duration: f64, dt: f64) -> usize {
    let steps = duration / dt;
    let rounded = steps.round();
    if (steps - rounded).abs() <= 1e-9 * steps.max(1.0) {
        rounded as usize
    } else {
        steps.ceil() as usize
    }
}

pub fn make_profile(req: &MotionRequest) -> Result<MotionProfile> {
    let (duration, vmax, adjustment) = feasible_parameters(req)?;
    let ramp = req.ramp_fraction * duration / 2.0;
    let mut profile = MotionProfile {
        t0: 0.0,
        t1: ramp,
        t2: duration - ramp,
        t3: duration,
        dt: req.dt,
        start: req.start,
        end: req.end,
        unit: req.unit,
        effective_vmax: vmax,
        effective_duration: duration,
        adjustment,
        samples: Vec::new(),
    };
    let steps = steps_for(duration, req.dt);
    profile.samples = (0..=steps)
        .map(|k| {
            let t = (k as f64 * req.dt).min(duration);
            let t = if k == steps { duration } else { t };
            Sample {
                t,
                position: profile.position_at(t),
                velocity: profile.velocity_at(t),
                acceleration: profile.acceleration_at(t),
            }
        })
        .collect();
    Ok(profile)
}

/// Derivative of a uniformly sampled series.
///
/// Central differences in the interior and second-order one-sided
/// differences at both ends, so linear and quadratic series are reproduced
/// exactly up to rounding.
pub fn differentiate(values: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidMotion(format!(
            "differentiation needs at least 3 samples, got {n}"
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidMotion(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    out.push((4.0 * (values[1] - values[0]) - (values[2] - values[0])) / (2.0 * dt));
    out.extend(values.windows(3).map(|w| (w[2] - w[0]) / (2.0 * dt)));
    out.push(
        (4.0 * (values[n - 1] - values[n - 2]) - (values[n - 1] - values[n - 3])) / (2.0 * dt),
    );
    Ok(out)
}

/// Trapezoidal-rule integral of a uniformly sampled series.
pub fn integrate_trapezoid(values: &[f64], dt: f64) -> f64 {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum()
}
