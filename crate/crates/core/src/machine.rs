//! Machine parameter files.
//!
//! A machine file is a JSON document in SI units (angles in degrees) holding
//! masses, link lengths, joint geometry, cylinder bores and the settings the
//! mechanics kernels read. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::ScalingRule;

pub const GRAVITY: f64 = 9.81;

/// Pressure held in the lowering chamber unless a machine overrides it (2.5 bar).
pub const DEFAULT_LOWERING_PRESSURE_PA: f64 = 2.5e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineKind {
    MaterialHandler,
    ForestForwarder,
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::MaterialHandler => "material_handler",
            MachineKind::ForestForwarder => "forest_forwarder",
        })
    }
}

/// Position of the boom-cylinder base relative to the boom foot pin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum BoomMount {
    /// Explicit coordinates; take precedence over a `z_c` derivation.
    Coordinates { x_c: f64, y_c: f64 },
    /// Diagonal mount at distance `z_c`: `x_c = z_c/√2`, `y_c = -z_c/√2`.
    Diagonal { z_c: f64 },
}

impl BoomMount {
    pub fn coordinates(&self) -> (f64, f64) {
        match *self {
            BoomMount::Coordinates { x_c, y_c } => (x_c, y_c),
            BoomMount::Diagonal { z_c } => {
                let d = z_c / std::f64::consts::SQRT_2;
                (d, -d)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cylinder {
    /// Bore diameter, m.
    pub d_cyl: f64,
    /// Rod diameter, m.
    pub d_rod: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cabin {
    pub mass: f64,
    pub length: f64,
    pub width: f64,
}

/// Arm-cylinder linkage; which variant is required depends on the machine kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArmLinkage {
    /// Material handler: cylinder closes the triangle B–D–C.
    MaterialHandler { l_joints_bd: f64, l_joints_dc: f64 },
    /// Forwarder: cylinder closes the triangle C–D / B–C around the arm joint.
    Forwarder {
        l_joint_cd: f64,
        l_joint_bc: f64,
        /// Lever of the attachment and load about the arm joint, m.
        l_arm_bucket: f64,
    },
}

/// Slewing-bearing friction torque model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BearingFriction {
    #[default]
    None,
    ConstantTorque {
        torque_nm: f64,
    },
    /// `μ · m_supported · g · D / 2`.
    Coefficient {
        mu: f64,
        bearing_diameter_m: f64,
    },
}

impl BearingFriction {
    /// Friction torque magnitude for the given supported mass.
    pub fn torque(&self, supported_mass: f64) -> f64 {
        match *self {
            BearingFriction::None => 0.0,
            BearingFriction::ConstantTorque { torque_nm } => torque_nm,
            BearingFriction::Coefficient {
                mu,
                bearing_diameter_m,
            } => mu * supported_mass * GRAVITY * bearing_diameter_m / 2.0,
        }
    }
}

/// Lowering-force formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoweringFormula {
    /// `p · (π/2) · (D − d)²`, from the diameter difference.
    #[default]
    Difference,
    /// `p · (π/4) · (D² − d²)`, the rod-side annulus area.
    Annulus,
}

/// Joint angle fed to the boom-cylinder direction (θc) formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoomAngleSource {
    /// Boom angle θ1, consistent with the force denominator `sin(θc − θ1)`.
    #[default]
    Boom,
    /// Boom–arm angle θ2, as the θc expression is printed.
    Arm,
}

/// Joint angle fed to the material-handler arm-cylinder law of cosines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArmAngleSource {
    /// Boom–arm angle θ2: the cylinder length follows the arm motion.
    #[default]
    Arm,
    /// Boom angle θ1, as printed; yields a constant cylinder length during arm tasks.
    Boom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleRange {
    pub min_deg: f64,
    pub max_deg: f64,
}

impl AngleRange {
    pub fn contains(&self, deg: f64) -> bool {
        deg >= self.min_deg && deg <= self.max_deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JointLimits {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boom: Option<AngleRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<AngleRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotate: Option<AngleRange>,
}

/// Pose assumed for a joint no task has positioned yet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub boom_deg: f64,
    pub arm_deg: f64,
}

impl Default for Pose {
    fn default() -> Self {
        Pose {
            boom_deg: 45.0,
            arm_deg: 90.0,
        }
    }
}

fn default_pressure() -> f64 {
    DEFAULT_LOWERING_PRESSURE_PA
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineParams {
    pub name: String,
    pub kind: MachineKind,
    pub m_vehicle: f64,
    pub m_boom: f64,
    pub m_arm: f64,
    /// Grapple/bucket mass carried at the arm tip, added to every task load.
    pub m_attachment: f64,
    pub l_boom: f64,
    pub l_arm: f64,
    /// Upper-carriage body; only the material handler includes it in swing inertia.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cabin: Option<Cabin>,
    pub boom_mount: BoomMount,
    pub l_joints_ab: f64,
    pub arm_linkage: ArmLinkage,
    pub boom_cylinder: Cylinder,
    pub arm_cylinder: Cylinder,
    /// Lowering-chamber pressure, Pa.
    #[serde(default = "default_pressure")]
    pub p_lower: f64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub lowering_formula: LoweringFormula,
    #[serde(default, skip_serializing_if = "is_default")]
    pub bearing_friction: BearingFriction,
    #[serde(default, skip_serializing_if = "is_default")]
    pub boom_angle_source: BoomAngleSource,
    #[serde(default, skip_serializing_if = "is_default")]
    pub arm_angle_source: ArmAngleSource,
    #[serde(default, skip_serializing_if = "is_default")]
    pub limits: JointLimits,
    #[serde(default)]
    pub default_pose: Pose,
    /// Power drawn during wait tasks, W.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub idle_power_w: f64,
    /// Per-field overrides of the default scaling rule.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scaling_rules: BTreeMap<String, ScalingRule>,
}

impl MachineParams {
    pub fn from_json(text: &str) -> Result<Self> {
        let params: MachineParams = serde_json::from_str(text).map_err(Error::from_json)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = crate::io::read_text(path.as_ref())?;
        Self::from_json(&text)
    }

    pub fn mount(&self) -> (f64, f64) {
        self.boom_mount.coordinates()
    }

    /// Attachment plus task load, the mass carried at the arm tip.
    pub fn tip_mass(&self, load: f64) -> f64 {
        self.m_attachment + load
    }

    /// Mass resting on the slewing bearing.
    pub fn supported_mass(&self, load: f64) -> f64 {
        let cabin = self.cabin.map_or(0.0, |c| c.mass);
        cabin + self.m_boom + self.m_arm + self.tip_mass(load)
    }

    pub fn lowering_force(&self, cylinder: &Cylinder) -> f64 {
        crate::handler::cyl_force_lower(
            cylinder.d_cyl,
            cylinder.d_rod,
            self.p_lower,
            self.lowering_formula,
        )
    }

    /// Checks every invariant and lists all offenders.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name} must be positive (got {v})"));
            }
        };
        positive("m_vehicle", self.m_vehicle);
        positive("m_boom", self.m_boom);
        positive("m_arm", self.m_arm);
        positive("l_boom", self.l_boom);
        positive("l_arm", self.l_arm);
        positive("l_joints_ab", self.l_joints_ab);
        positive("boom_cylinder.d_cyl", self.boom_cylinder.d_cyl);
        positive("boom_cylinder.d_rod", self.boom_cylinder.d_rod);
        positive("arm_cylinder.d_cyl", self.arm_cylinder.d_cyl);
        positive("arm_cylinder.d_rod", self.arm_cylinder.d_rod);
        if let Some(cabin) = self.cabin {
            positive("cabin.mass", cabin.mass);
            positive("cabin.length", cabin.length);
            positive("cabin.width", cabin.width);
        }
        match self.arm_linkage {
            ArmLinkage::MaterialHandler {
                l_joints_bd,
                l_joints_dc,
            } => {
                positive("arm_linkage.l_joints_bd", l_joints_bd);
                positive("arm_linkage.l_joints_dc", l_joints_dc);
            }
            ArmLinkage::Forwarder {
                l_joint_cd,
                l_joint_bc,
                l_arm_bucket,
            } => {
                positive("arm_linkage.l_joint_cd", l_joint_cd);
                positive("arm_linkage.l_joint_bc", l_joint_bc);
                positive("arm_linkage.l_arm_bucket", l_arm_bucket);
            }
        }
        match self.bearing_friction {
            BearingFriction::None => {}
            BearingFriction::ConstantTorque { torque_nm } => {
                if !(torque_nm >= 0.0) {
                    problems.push(format!(
                        "bearing friction torque must be >= 0 (got {torque_nm})"
                    ));
                }
            }
            BearingFriction::Coefficient {
                mu,
                bearing_diameter_m,
            } => {
                if !(mu >= 0.0) || !(bearing_diameter_m > 0.0) {
                    problems.push("bearing friction needs mu >= 0 and a positive diameter".into());
                }
            }
        }
        if !(self.m_attachment >= 0.0) {
            problems.push(format!(
                "m_attachment must be >= 0 (got {})",
                self.m_attachment
            ));
        }
        if !(self.p_lower >= 0.0) {
            problems.push(format!("p_lower must be >= 0 (got {})", self.p_lower));
        }
        if !(self.idle_power_w >= 0.0) {
            problems.push(format!(
                "idle_power_w must be >= 0 (got {})",
                self.idle_power_w
            ));
        }
        for (name, cyl) in [
            ("boom_cylinder", self.boom_cylinder),
            ("arm_cylinder", self.arm_cylinder),
        ] {
            if cyl.d_rod >= cyl.d_cyl {
                problems.push(format!(
                    "{name}: rod diameter {} must be smaller than bore {}",
                    cyl.d_rod, cyl.d_cyl
                ));
            }
        }
        let (x_c, y_c) = self.mount();
        if !(x_c.is_finite() && y_c.is_finite()) {
            problems.push("boom mount coordinates must be finite".into());
        }
        let linkage_ok = matches!(
            (self.kind, self.arm_linkage),
            (
                MachineKind::MaterialHandler,
                ArmLinkage::MaterialHandler { .. }
            ) | (MachineKind::ForestForwarder, ArmLinkage::Forwarder { .. })
        );
        if !linkage_ok {
            problems.push(format!(
                "arm_linkage type does not match machine kind {}",
                self.kind
            ));
        }
        if self.kind == MachineKind::MaterialHandler && self.cabin.is_none() {
            problems.push("a material handler needs cabin dimensions".into());
        }
        for key in self.scaling_rules.keys() {
            if !crate::scaling::SCALABLE_FIELDS.contains(&key.as_str()) {
                problems.push(format!("scaling rule for unknown field `{key}`"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidMachine(problems))
        }
    }
}
