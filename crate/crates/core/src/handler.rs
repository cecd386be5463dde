//! Quasi-static material-handler mechanics: boom, arm and upper-carriage swing.
//!
//! Joint angles are in degrees at the interface. `theta1` is the boom angle
//! to the base, `theta2` the boom–arm angle, so the arm points along
//! `theta1 + 180 - theta2`. Link centres of mass sit at mid-length; the
//! attachment and the task load sit at the arm tip.
//!
//! Reported powers are actuator effort magnitudes `|F|·|v|` (or `|M·ω|`);
//! regeneration is not modelled.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kinematics::{differentiate, MotionProfile};
use crate::machine::{
    ArmAngleSource, ArmLinkage, BoomAngleSource, LoweringFormula, MachineKind, MachineParams,
    GRAVITY,
};
use crate::series::{Component, ComponentLoadSeries, Direction};

/// Smallest `|sin|` accepted in a force denominator.
pub const SINGULAR_SIN: f64 = 1e-6;

/// Slack allowed on a law-of-cosines argument before it is treated as infeasible.
pub const COSINE_SLACK: f64 = 1e-9;

fn cos_deg(deg: f64) -> f64 {
    deg.to_radians().cos()
}

fn sin_deg(deg: f64) -> f64 {
    deg.to_radians().sin()
}

/// Direction of the arm in the machine frame, degrees.
pub fn arm_heading(theta1: f64, theta2: f64) -> f64 {
    theta1 + 180.0 - theta2
}

/// Centres of mass of the manipulator chain in the boom plane, measured from the boom foot pin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComChain {
    pub x_boom: f64,
    pub y_boom: f64,
    pub x_arm: f64,
    pub y_arm: f64,
    pub x_bucket: f64,
    pub y_bucket: f64,
    pub x_arm_tot: f64,
    pub y_arm_tot: f64,
    pub x_com: f64,
    pub y_com: f64,
    pub m_arm_tot: f64,
    pub m_tot: f64,
}

pub fn com_chain(params: &MachineParams, theta1: f64, theta2: f64, load: f64) -> ComChain {
    let heading = arm_heading(theta1, theta2);
    let (l_boom, l_arm) = (params.l_boom, params.l_arm);

    let x_boom = l_boom / 2.0 * cos_deg(theta1);
    let y_boom = l_boom / 2.0 * sin_deg(theta1);
    let x_arm = l_boom * cos_deg(theta1) + l_arm / 2.0 * cos_deg(heading);
    let y_arm = l_boom * sin_deg(theta1) + l_arm / 2.0 * sin_deg(heading);
    let x_bucket = l_boom * cos_deg(theta1) + l_arm * cos_deg(heading);
    let y_bucket = l_boom * sin_deg(theta1) + l_arm * sin_deg(heading);

    let m_tip = params.tip_mass(load);
    let m_arm_tot = params.m_arm + m_tip;
    let x_arm_tot = (params.m_arm * x_arm + m_tip * x_bucket) / m_arm_tot;
    let y_arm_tot = (params.m_arm * y_arm + m_tip * y_bucket) / m_arm_tot;

    let m_tot = params.m_boom + m_arm_tot;
    let x_com = (params.m_boom * x_boom + m_arm_tot * x_arm_tot) / m_tot;
    let y_com = (params.m_boom * y_boom + m_arm_tot * y_arm_tot) / m_tot;

    ComChain {
        x_boom,
        y_boom,
        x_arm,
        y_arm,
        x_bucket,
        y_bucket,
        x_arm_tot,
        y_arm_tot,
        x_com,
        y_com,
        m_arm_tot,
        m_tot,
    }
}

/// Gravity moment of the whole manipulator about the boom foot pin, N·m.
pub fn boom_torque(params: &MachineParams, theta1: f64, theta2: f64, load: f64) -> f64 {
    let chain = com_chain(params, theta1, theta2, load);
    chain.m_tot * GRAVITY * chain.x_com
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoomCylinderGeometry {
    /// Angle of the cylinder line, degrees.
    pub theta_c: f64,
    /// Pin-to-mount cylinder length, m.
    pub length: f64,
}

/// `θc = atan2(l_AB·cosθ − x_c, l_AB·sinθ − y_c)`, numerator/denominator in the
/// order the model defines them.
pub fn boom_cylinder_angle(l_ab: f64, x_c: f64, y_c: f64, angle: f64) -> f64 {
    (l_ab * cos_deg(angle) - x_c)
        .atan2(l_ab * sin_deg(angle) - y_c)
        .to_degrees()
}

pub fn boom_cylinder_length(l_ab: f64, x_c: f64, y_c: f64, theta1: f64) -> f64 {
    (l_ab * cos_deg(theta1) - x_c).hypot(l_ab * sin_deg(theta1) - y_c)
}

pub fn boom_cyl_geometry(
    params: &MachineParams,
    theta1: f64,
    theta2: f64,
) -> Result<BoomCylinderGeometry> {
    let (x_c, y_c) = params.mount();
    let length = boom_cylinder_length(params.l_joints_ab, x_c, y_c, theta1);
    if length < 1e-12 {
        return Err(Error::SingularGeometry(format!(
            "boom cylinder mount coincides with the boom pin at theta1 = {theta1} deg"
        )));
    }
    let angle = match params.boom_angle_source {
        BoomAngleSource::Boom => theta1,
        BoomAngleSource::Arm => theta2,
    };
    Ok(BoomCylinderGeometry {
        theta_c: boom_cylinder_angle(params.l_joints_ab, x_c, y_c, angle),
        length,
    })
}

/// Cylinder force magnitude balancing `moment` through a lever of length
/// `lever` meeting the cylinder line at `angle_deg`.
pub fn lever_force(moment: f64, lever: f64, angle_deg: f64) -> Result<f64> {
    let s = sin_deg(angle_deg);
    if s.abs() < SINGULAR_SIN {
        return Err(Error::SingularGeometry(format!(
            "cylinder line parallel to lever (angle {angle_deg:.6} deg)"
        )));
    }
    Ok((moment / (lever * s)).abs())
}

pub fn boom_cyl_force_lift(
    params: &MachineParams,
    theta1: f64,
    theta2: f64,
    load: f64,
) -> Result<f64> {
    let moment = boom_torque(params, theta1, theta2, load);
    let geometry = boom_cyl_geometry(params, theta1, theta2)?;
    lever_force(moment, params.l_joints_ab, geometry.theta_c - theta1).map_err(|e| match e {
        Error::SingularGeometry(msg) => Error::SingularGeometry(format!(
            "boom at theta1 = {theta1} deg, theta2 = {theta2} deg: {msg}"
        )),
        other => other,
    })
}

/// Force held by the lowering chamber pressure, N.
pub fn cyl_force_lower(d_cyl: f64, d_rod: f64, p_lower: f64, formula: LoweringFormula) -> f64 {
    match formula {
        LoweringFormula::Difference => p_lower * PI / 2.0 * (d_cyl - d_rod).powi(2),
        LoweringFormula::Annulus => p_lower * PI / 4.0 * (d_cyl * d_cyl - d_rod * d_rod),
    }
}

/// Builds a cylinder series from per-sample lengths and force magnitudes.
pub(crate) fn cylinder_series(
    component: Component,
    profile: &MotionProfile,
    lengths: Vec<f64>,
    forces: Vec<f64>,
    over_center: bool,
) -> Result<ComponentLoadSeries> {
    let velocity = differentiate(&lengths, profile.dt)?;
    let power = forces
        .iter()
        .zip(&velocity)
        .map(|(f, v)| f * v.abs())
        .collect();
    Ok(ComponentLoadSeries {
        component,
        dt: profile.dt,
        time: profile.times(),
        force_n: Some(forces),
        cyl_velocity_mps: Some(velocity),
        torque_nm: None,
        power_w: power,
        over_center,
    })
}

pub(crate) fn tag_sample(err: Error, t: f64) -> Error {
    match err {
        Error::SingularGeometry(msg) => Error::SingularGeometry(format!("{msg} (t = {t:.3} s)")),
        other => other,
    }
}

/// Boom cylinder load over a boom motion with the arm held at `theta2`.
pub fn boom_power(
    params: &MachineParams,
    theta1_profile: &MotionProfile,
    theta2: f64,
    load: f64,
    direction: Direction,
) -> Result<ComponentLoadSeries> {
    let (x_c, y_c) = params.mount();
    let lengths: Vec<f64> = theta1_profile
        .samples
        .iter()
        .map(|s| boom_cylinder_length(params.l_joints_ab, x_c, y_c, s.position))
        .collect();
    let mut over_center = false;
    let forces = match direction {
        Direction::Lift => {
            let first = boom_torque(params, theta1_profile.start, theta2, load).signum();
            theta1_profile
                .samples
                .iter()
                .map(|s| {
                    if boom_torque(params, s.position, theta2, load).signum() != first {
                        over_center = true;
                    }
                    boom_cyl_force_lift(params, s.position, theta2, load)
                        .map_err(|e| tag_sample(e, s.t))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Direction::Lower => {
            for s in &theta1_profile.samples {
                boom_cyl_geometry(params, s.position, theta2).map_err(|e| tag_sample(e, s.t))?;
            }
            vec![params.lowering_force(&params.boom_cylinder); lengths.len()]
        }
    };
    cylinder_series(
        Component::Boom,
        theta1_profile,
        lengths,
        forces,
        over_center,
    )
}

/// Energy-rate diagnostic for a boom lift: actuator energy over the change in
/// potential energy of the manipulator. Not expected to be 1; logged only.
pub fn boom_energy_ratio(
    params: &MachineParams,
    series: &ComponentLoadSeries,
    profile: &MotionProfile,
    theta2: f64,
    load: f64,
) -> f64 {
    let before = com_chain(params, profile.start, theta2, load);
    let after = com_chain(params, profile.end, theta2, load);
    let potential = before.m_tot * GRAVITY * (after.y_com - before.y_com);
    let ratio = series.energy_j() / potential.abs();
    log::info!(
        "boom {} -> {} deg: actuator energy {:.1} J, potential change {:.1} J, ratio {:.3}",
        profile.start,
        profile.end,
        series.energy_j(),
        potential,
        ratio
    );
    ratio
}

/// Signed gravity moment about the arm joint, N·m.
pub fn arm_moment(params: &MachineParams, theta1: f64, theta2: f64, load: f64) -> f64 {
    let alpha = -90.0 + theta2 + theta1;
    let s = sin_deg(alpha);
    params.tip_mass(load) * GRAVITY * params.l_arm * s
        + params.m_arm * GRAVITY * params.l_arm / 2.0 * s
}

/// Third side of a triangle with sides `a`, `b` enclosing `angle_deg`.
pub fn law_of_cosines(a: f64, b: f64, angle_deg: f64) -> f64 {
    (a * a + b * b - 2.0 * a * b * cos_deg(angle_deg))
        .max(0.0)
        .sqrt()
}

/// `acos` with arguments up to [`COSINE_SLACK`] outside `[-1, 1]` clamped; degrees.
pub fn acos_checked(x: f64, what: &str) -> Result<f64> {
    if !(x.abs() <= 1.0 + COSINE_SLACK) {
        return Err(Error::SingularGeometry(format!(
            "{what}: law-of-cosines argument {x} outside [-1, 1]"
        )));
    }
    Ok(x.clamp(-1.0, 1.0).acos().to_degrees())
}

fn handler_linkage(params: &MachineParams) -> Result<(f64, f64)> {
    match params.arm_linkage {
        ArmLinkage::MaterialHandler {
            l_joints_bd,
            l_joints_dc,
        } => Ok((l_joints_bd, l_joints_dc)),
        ArmLinkage::Forwarder { .. } => Err(Error::UnsupportedTask {
            task: "material-handler arm".into(),
            machine: MachineKind::ForestForwarder.to_string(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmCylinderGeometry {
    pub length: f64,
    /// Angle between cylinder and the D–C link, degrees.
    pub beta: f64,
}

/// Arm-cylinder length over the B–D–C triangle and the angle β at C.
pub fn arm_cyl_geometry(l_bd: f64, l_dc: f64, angle: f64) -> Result<ArmCylinderGeometry> {
    let length = law_of_cosines(l_bd, l_dc, angle);
    if length < 1e-12 {
        return Err(Error::SingularGeometry(
            "arm cylinder collapsed to zero length".into(),
        ));
    }
    let cos_beta = (length * length + l_dc * l_dc - l_bd * l_bd) / (2.0 * length * l_dc);
    Ok(ArmCylinderGeometry {
        length,
        beta: acos_checked(cos_beta, "arm cylinder angle beta")?,
    })
}

fn arm_linkage_angle(params: &MachineParams, theta1: f64, theta2: f64) -> f64 {
    match params.arm_angle_source {
        ArmAngleSource::Arm => theta2,
        ArmAngleSource::Boom => theta1,
    }
}

/// Material-handler arm cylinder load over an arm motion with the boom held at `theta1`.
pub fn arm_force_and_power(
    params: &MachineParams,
    theta1: f64,
    theta2_profile: &MotionProfile,
    load: f64,
    direction: Direction,
) -> Result<ComponentLoadSeries> {
    let (l_bd, l_dc) = handler_linkage(params)?;
    let geometry = theta2_profile
        .samples
        .iter()
        .map(|s| {
            arm_cyl_geometry(l_bd, l_dc, arm_linkage_angle(params, theta1, s.position))
                .map_err(|e| tag_sample(e, s.t))
        })
        .collect::<Result<Vec<_>>>()?;
    let lengths = geometry.iter().map(|g| g.length).collect();
    let mut over_center = false;
    let forces = match direction {
        Direction::Lift => {
            let first = arm_moment(params, theta1, theta2_profile.start, load).signum();
            theta2_profile
                .samples
                .iter()
                .zip(&geometry)
                .map(|(s, g)| {
                    let moment = arm_moment(params, theta1, s.position, load);
                    if moment.signum() != first {
                        over_center = true;
                    }
                    lever_force(moment, l_dc, g.beta).map_err(|e| tag_sample(e, s.t))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Direction::Lower => vec![params.lowering_force(&params.arm_cylinder); geometry.len()],
    };
    cylinder_series(Component::Arm, theta2_profile, lengths, forces, over_center)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingInertia {
    pub cabin: f64,
    pub boom: f64,
    /// Arm rod plus the attachment and load at the tip radius.
    pub arm: f64,
    pub total: f64,
}

/// Moments of inertia about the slewing axis, kg·m².
///
/// The cabin term is only present for machine kinds whose cabin rotates with the crane model.
pub fn swing_inertia(params: &MachineParams, theta1: f64, theta2: f64, load: f64) -> SwingInertia {
    let cabin = match (params.kind, params.cabin) {
        (MachineKind::MaterialHandler, Some(c)) => {
            c.mass * (c.length.powi(2) + c.width.powi(2)) / 12.0
        }
        _ => 0.0,
    };
    let boom = params.m_boom * params.l_boom.powi(2) / 3.0;
    let chain = com_chain(params, theta1, theta2, load);
    let r_arm_sq = chain.x_arm.powi(2) + chain.y_arm.powi(2);
    let r_tip_sq = chain.x_bucket.powi(2) + chain.y_bucket.powi(2);
    let arm = params.m_arm * params.l_arm.powi(2) / 12.0
        + params.m_arm * r_arm_sq
        + params.tip_mass(load) * r_tip_sq;
    SwingInertia {
        cabin,
        boom,
        arm,
        total: cabin + boom + arm,
    }
}

/// Slewing torque and power over a rotation with a fixed manipulator pose.
pub fn swing_power(
    params: &MachineParams,
    rotation: &MotionProfile,
    theta1: f64,
    theta2: f64,
    load: f64,
) -> Result<ComponentLoadSeries> {
    let inertia = swing_inertia(params, theta1, theta2, load).total;
    let friction = params.bearing_friction.torque(params.supported_mass(load));
    let mut torque = Vec::with_capacity(rotation.samples.len());
    let mut power = Vec::with_capacity(rotation.samples.len());
    for s in &rotation.samples {
        let omega = s.velocity.to_radians();
        let omega_dot = s.acceleration.to_radians();
        let resisting = if omega == 0.0 {
            0.0
        } else {
            friction * omega.signum()
        };
        let m = inertia * omega_dot + resisting;
        torque.push(m);
        power.push((m * omega).abs());
    }
    Ok(ComponentLoadSeries {
        component: Component::Swing,
        dt: rotation.dt,
        time: rotation.times(),
        force_n: None,
        cyl_velocity_mps: None,
        torque_nm: Some(torque),
        power_w: power,
        over_center: false,
    })
}
