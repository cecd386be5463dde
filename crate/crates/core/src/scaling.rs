//! Derives parameter sets for other machine sizes from a reference machine.
//!
//! Mass-like parameters keep their share of the vehicle mass
//! (`p_new = p_ref / m_vehicle_ref · m_vehicle_new`). Length-like parameters
//! follow geometric similarity and scale with the cube root of the mass
//! ratio. Everything else is copied. The rule of any field can be overridden
//! in the reference machine file under `scaling_rules`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{ArmLinkage, BearingFriction, BoomMount, MachineParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingRule {
    MassProportional,
    LengthProportional,
    Fixed,
}

/// Every field a scaling rule can be attached to, in file notation.
pub const SCALABLE_FIELDS: &[&str] = &[
    "m_boom",
    "m_arm",
    "m_attachment",
    "cabin.mass",
    "cabin.length",
    "cabin.width",
    "l_boom",
    "l_arm",
    "boom_mount.x_c",
    "boom_mount.y_c",
    "boom_mount.z_c",
    "l_joints_ab",
    "arm_linkage.l_joints_bd",
    "arm_linkage.l_joints_dc",
    "arm_linkage.l_joint_cd",
    "arm_linkage.l_joint_bc",
    "arm_linkage.l_arm_bucket",
    "boom_cylinder.d_cyl",
    "boom_cylinder.d_rod",
    "arm_cylinder.d_cyl",
    "arm_cylinder.d_rod",
    "p_lower",
    "bearing_friction.torque_nm",
    "bearing_friction.bearing_diameter_m",
    "idle_power_w",
];

pub fn default_rule(field: &str) -> ScalingRule {
    match field {
        "m_boom" | "m_arm" | "m_attachment" | "cabin.mass" | "bearing_friction.torque_nm" => {
            ScalingRule::MassProportional
        }
        "p_lower" | "idle_power_w" => ScalingRule::Fixed,
        _ => ScalingRule::LengthProportional,
    }
}

/// Share of the vehicle mass a reference parameter represents.
pub fn scaling_factor(ref_value: f64, ref_vehicle_mass: f64) -> Result<f64> {
    if !(ref_vehicle_mass.is_finite() && ref_vehicle_mass > 0.0) {
        return Err(Error::InvalidMachine(vec![format!(
            "reference vehicle mass must be positive (got {ref_vehicle_mass})"
        )]));
    }
    Ok(ref_value / ref_vehicle_mass)
}

/// Visits every scalable scalar of a machine together with its field name.
fn for_each_scalar(params: &mut MachineParams, mut f: impl FnMut(&'static str, &mut f64)) {
    f("m_boom", &mut params.m_boom);
    f("m_arm", &mut params.m_arm);
    f("m_attachment", &mut params.m_attachment);
    f("l_boom", &mut params.l_boom);
    f("l_arm", &mut params.l_arm);
    if let Some(cabin) = params.cabin.as_mut() {
        f("cabin.mass", &mut cabin.mass);
        f("cabin.length", &mut cabin.length);
        f("cabin.width", &mut cabin.width);
    }
    match &mut params.boom_mount {
        BoomMount::Coordinates { x_c, y_c } => {
            f("boom_mount.x_c", x_c);
            f("boom_mount.y_c", y_c);
        }
        BoomMount::Diagonal { z_c } => f("boom_mount.z_c", z_c),
    }
    f("l_joints_ab", &mut params.l_joints_ab);
    match &mut params.arm_linkage {
        ArmLinkage::MaterialHandler {
            l_joints_bd,
            l_joints_dc,
        } => {
            f("arm_linkage.l_joints_bd", l_joints_bd);
            f("arm_linkage.l_joints_dc", l_joints_dc);
        }
        ArmLinkage::Forwarder {
            l_joint_cd,
            l_joint_bc,
            l_arm_bucket,
        } => {
            f("arm_linkage.l_joint_cd", l_joint_cd);
            f("arm_linkage.l_joint_bc", l_joint_bc);
            f("arm_linkage.l_arm_bucket", l_arm_bucket);
        }
    }
    f("boom_cylinder.d_cyl", &mut params.boom_cylinder.d_cyl);
    f("boom_cylinder.d_rod", &mut params.boom_cylinder.d_rod);
    f("arm_cylinder.d_cyl", &mut params.arm_cylinder.d_cyl);
    f("arm_cylinder.d_rod", &mut params.arm_cylinder.d_rod);
    f("p_lower", &mut params.p_lower);
    match &mut params.bearing_friction {
        BearingFriction::None => {}
        BearingFriction::ConstantTorque { torque_nm } => f("bearing_friction.torque_nm", torque_nm),
        BearingFriction::Coefficient {
            bearing_diameter_m, ..
        } => f("bearing_friction.bearing_diameter_m", bearing_diameter_m),
    }
    f("idle_power_w", &mut params.idle_power_w);
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReference {
    pub reference: MachineParams,
    pub rules: BTreeMap<&'static str, ScalingRule>,
}

impl ScalingReference {
    /// Default rules, overridden by the reference machine's own `scaling_rules`.
    pub fn new(reference: MachineParams) -> Result<Self> {
        reference.validate()?;
        scaling_factor(0.0, reference.m_vehicle)?;
        let rules = SCALABLE_FIELDS
            .iter()
            .map(|&field| {
                let rule = reference
                    .scaling_rules
                    .get(field)
                    .copied()
                    .unwrap_or_else(|| default_rule(field));
                (field, rule)
            })
            .collect();
        Ok(ScalingReference { reference, rules })
    }

    pub fn reference_mass(&self) -> f64 {
        self.reference.m_vehicle
    }

    pub fn rule(&self, field: &str) -> ScalingRule {
        self.rules
            .get(field)
            .copied()
            .unwrap_or_else(|| default_rule(field))
    }
}

pub fn scale_machine(reference: &ScalingReference, new_vehicle_mass: f64) -> Result<MachineParams> {
    if !(new_vehicle_mass.is_finite() && new_vehicle_mass > 0.0) {
        return Err(Error::InvalidMachine(vec![format!(
            "target vehicle mass must be positive (got {new_vehicle_mass})"
        )]));
    }
    let ref_mass = reference.reference_mass();
    if new_vehicle_mass == ref_mass {
        return Ok(reference.reference.clone());
    }
    let length_ratio = (new_vehicle_mass / ref_mass).cbrt();
    let mut scaled = reference.reference.clone();
    let mut failure = None;
    for_each_scalar(&mut scaled, |field, value| match reference.rule(field) {
        ScalingRule::MassProportional => match scaling_factor(*value, ref_mass) {
            Ok(factor) => *value = factor * new_vehicle_mass,
            Err(e) => failure = Some(e),
        },
        ScalingRule::LengthProportional => *value *= length_ratio,
        ScalingRule::Fixed => {}
    });
    if let Some(e) = failure {
        return Err(e);
    }
    scaled.m_vehicle = new_vehicle_mass;
    scaled.name = format!(
        "{} scaled to {} kg",
        reference.reference.name, new_vehicle_mass
    );
    scaled.validate()?;
    Ok(scaled)
}
