//! Forest-forwarder crane arm. Boom and slewing reuse the material-handler
//! kernels in [`crate::handler`]; the forwarder has no rotating cabin term and
//! no bearing friction unless its machine file configures one.

use crate::error::{Error, Result};
use crate::handler::{cylinder_series, law_of_cosines, lever_force, tag_sample};
use crate::kinematics::MotionProfile;
use crate::machine::{ArmLinkage, MachineKind, MachineParams, GRAVITY};
use crate::series::{Component, ComponentLoadSeries, Direction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwarderLinkage {
    pub l_joint_cd: f64,
    pub l_joint_bc: f64,
    pub l_arm_bucket: f64,
}

pub fn linkage(params: &MachineParams) -> Result<ForwarderLinkage> {
    match params.arm_linkage {
        ArmLinkage::Forwarder {
            l_joint_cd,
            l_joint_bc,
            l_arm_bucket,
        } => Ok(ForwarderLinkage {
            l_joint_cd,
            l_joint_bc,
            l_arm_bucket,
        }),
        ArmLinkage::MaterialHandler { .. } => Err(Error::UnsupportedTask {
            task: "forwarder arm".into(),
            machine: MachineKind::MaterialHandler.to_string(),
        }),
    }
}

/// Angle between the arm-cylinder links at the arm joint, degrees.
pub fn cylinder_angle(theta2: f64) -> f64 {
    180.0 - theta2
}

pub fn ff_arm_cyl_length(params: &MachineParams, theta2: f64) -> Result<f64> {
    let l = linkage(params)?;
    Ok(law_of_cosines(
        l.l_joint_cd,
        l.l_joint_bc,
        cylinder_angle(theta2),
    ))
}

/// Signed gravity moment about the arm joint while lifting, N·m.
///
/// Negative once the arm tips past vertical (`θ1 + θ2 < 90°`).
pub fn ff_arm_torque(params: &MachineParams, theta1: f64, theta2: f64, load: f64) -> Result<f64> {
    let l = linkage(params)?;
    let alpha = (-90.0 + theta1 + theta2).to_radians();
    let w_tip = params.tip_mass(load) * GRAVITY;
    let w_arm = params.m_arm * GRAVITY;
    Ok(w_tip * l.l_arm_bucket * alpha.sin() + w_arm * params.l_arm / 2.0 * alpha.sin())
}

/// Arm cylinder load over an arm motion with the boom held at `theta1`.
pub fn ff_arm_power(
    params: &MachineParams,
    theta2_profile: &MotionProfile,
    theta1: f64,
    load: f64,
    direction: Direction,
) -> Result<ComponentLoadSeries> {
    let l = linkage(params)?;
    let lengths = theta2_profile
        .samples
        .iter()
        .map(|s| law_of_cosines(l.l_joint_cd, l.l_joint_bc, cylinder_angle(s.position)))
        .collect();
    let mut over_center = false;
    let forces = match direction {
        Direction::Lift => {
            let first = ff_arm_torque(params, theta1, theta2_profile.start, load)?.signum();
            theta2_profile
                .samples
                .iter()
                .map(|s| {
                    let moment = ff_arm_torque(params, theta1, s.position, load)?;
                    if moment.signum() != first {
                        over_center = true;
                    }
                    lever_force(moment, l.l_joint_cd, cylinder_angle(s.position))
                        .map_err(|e| tag_sample(e, s.t))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Direction::Lower => {
            vec![params.lowering_force(&params.arm_cylinder); theta2_profile.samples.len()]
        }
    };
    cylinder_series(Component::Arm, theta2_profile, lengths, forces, over_center)
}
