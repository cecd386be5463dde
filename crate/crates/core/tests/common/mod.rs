//! Shared fixtures, oracles and property checks for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use lpg_core::kinematics::steps_for;
use lpg_core::plan::{TaskSpec, TimeIni};
use lpg_core::{
    aggregate, make_profile, resolve_timeline, Adjustment, Component, LoadProfile, MachineParams,
    MotionProfile, MotionRequest, PlanDocument, TaskKind,
};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn machine(name: &str) -> MachineParams {
    MachineParams::load(fixture(name)).unwrap()
}

pub fn plan(name: &str) -> PlanDocument {
    PlanDocument::load(fixture(name)).unwrap()
}

pub fn forwarder() -> MachineParams {
    machine("forwarder.json")
}

pub fn handler() -> MachineParams {
    machine("material_handler_35t.json")
}

pub fn run(doc: &PlanDocument, m: &MachineParams) -> LoadProfile {
    aggregate(&resolve_timeline(doc).unwrap(), m).unwrap()
}

/// Largest per-task peak among tasks of the given kinds.
pub fn peak_of(profile: &LoadProfile, kinds: &[TaskKind]) -> f64 {
    profile
        .annotations
        .iter()
        .filter(|a| kinds.contains(&a.task))
        .map(|a| a.peak_power_w)
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Point-mass oracles

pub const ORACLE_POINTS: usize = 10_000;

/// A link of the manipulator chopped into equal point masses.
fn rod_points(
    origin: (f64, f64),
    heading_deg: f64,
    length: f64,
    mass: f64,
    n: usize,
) -> Vec<(f64, f64, f64)> {
    let (s, c) = heading_deg.to_radians().sin_cos();
    let dm = mass / n as f64;
    (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) / n as f64 * length;
            (origin.0 + r * c, origin.1 + r * s, dm)
        })
        .collect()
}

/// All point masses of boom, arm and tip payload for a pose; the arm is laid
/// out at `θ1 + 180 − θ2` from the boom tip.
pub fn point_cloud(
    m: &MachineParams,
    theta1: f64,
    theta2: f64,
    load: f64,
) -> [Vec<(f64, f64, f64)>; 3] {
    let boom = rod_points((0.0, 0.0), theta1, m.l_boom, m.m_boom, ORACLE_POINTS);
    let (s, c) = theta1.to_radians().sin_cos();
    let tip_of_boom = (m.l_boom * c, m.l_boom * s);
    let heading = theta1 + 180.0 - theta2;
    let arm = rod_points(tip_of_boom, heading, m.l_arm, m.m_arm, ORACLE_POINTS);
    let (hs, hc) = heading.to_radians().sin_cos();
    let tip = vec![(
        tip_of_boom.0 + m.l_arm * hc,
        tip_of_boom.1 + m.l_arm * hs,
        m.m_attachment + load,
    )];
    [boom, arm, tip]
}

pub fn oracle_x_com(m: &MachineParams, theta1: f64, theta2: f64, load: f64) -> f64 {
    let cloud = point_cloud(m, theta1, theta2, load);
    let (mx, mass) = cloud
        .iter()
        .flatten()
        .fold((0.0, 0.0), |(mx, mass), &(x, _, dm)| {
            (mx + x * dm, mass + dm)
        });
    mx / mass
}

/// Σ mᵢ rᵢ² with rᵢ the in-plane distance to the boom foot pin.
pub fn oracle_inertia(points: &[(f64, f64, f64)]) -> f64 {
    points.iter().map(|&(x, y, dm)| dm * (x * x + y * y)).sum()
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

// ---------------------------------------------------------------------------
// Kinematics

/// Trapezoid rule over the actual sample times (the last step may be short).
pub fn integrate_velocity(profile: &MotionProfile) -> f64 {
    profile
        .samples
        .windows(2)
        .map(|w| 0.5 * (w[0].velocity + w[1].velocity) * (w[1].t - w[0].t))
        .sum()
}

#[derive(Debug, Clone, Copy)]
pub struct RequestCase {
    pub request: MotionRequest,
    /// Set when the requested velocity was chosen to be exactly feasible.
    pub exact: bool,
}

pub fn arb_request() -> impl Strategy<Value = RequestCase> {
    (
        -90.0..90.0f64,
        1.0..120.0f64,
        prop::bool::ANY,
        2.0..8.0f64,
        1.0..60.0f64,
        0.2..0.9f64,
        0..4u8,
    )
        .prop_map(|(start, distance, down, duration, vmax, ramp, mode)| {
            let end = if down {
                start - distance
            } else {
                start + distance
            };
            let exact = mode == 0;
            let vmax = if exact {
                distance / (duration * (1.0 - ramp / 2.0))
            } else {
                vmax
            };
            RequestCase {
                request: MotionRequest::angular(start, end, duration, vmax, ramp, 0.01),
                exact,
            }
        })
}

/// Which feasibility rule should fire, decided from the trapezoid area.
pub fn expected_rule(req: &MotionRequest) -> &'static str {
    let s = (req.end - req.start).abs();
    let reach = req.vmax * req.duration * (1.0 - req.ramp_fraction / 2.0);
    if s == 0.0 || (s - reach).abs() <= 1e-12 * s.max(reach) {
        "none"
    } else if s > reach {
        "duration"
    } else {
        "velocity"
    }
}

pub fn rule_of(adjustment: &Adjustment) -> &'static str {
    match adjustment {
        Adjustment::None => "none",
        Adjustment::DurationIncreased { .. } => "duration",
        Adjustment::VelocityReduced { .. } => "velocity",
    }
}

/// Checks the numeric-integration oracle, rule classification and exact feasibility.
pub fn check_request(case: &RequestCase) -> Result<(), String> {
    let req = &case.request;
    let profile = make_profile(req).map_err(|e| e.to_string())?;
    let s = req.end - req.start;

    let integral = integrate_velocity(&profile);
    if (integral - s).abs() > s.abs() * 1e-4 {
        return Err(format!("∫v dt = {integral}, displacement {s}"));
    }

    let expected = expected_rule(req);
    let got = rule_of(&profile.adjustment);
    if expected != got {
        return Err(format!(
            "expected rule {expected}, got {got} ({:?})",
            profile.adjustment
        ));
    }
    if case.exact && got != "none" {
        return Err(format!(
            "exactly feasible request adjusted: {:?}",
            profile.adjustment
        ));
    }

    let area =
        profile.effective_vmax * profile.effective_duration * (1.0 - req.ramp_fraction / 2.0);
    if relative(area, s.abs()) > 1e-12 {
        return Err(format!(
            "adjusted trapezoid covers {area}, needs {}",
            s.abs()
        ));
    }
    let mid = (profile.t1 + profile.t2) / 2.0;
    if (profile.velocity_at(mid).abs() - profile.effective_vmax).abs()
        > 1e-12 * profile.effective_vmax
    {
        return Err("plateau speed differs from effective vmax".into());
    }
    let last = profile.samples.last().unwrap();
    if last.position != req.end || last.t != profile.effective_duration {
        return Err(format!(
            "profile ends at {} (t = {})",
            last.position, last.t
        ));
    }
    Ok(())
}

/// Velocity symmetry about the midpoint and piecewise-constant acceleration.
pub fn check_trapezoid_shape(req: &MotionRequest) -> Result<(), String> {
    let p = make_profile(req).map_err(|e| e.to_string())?;
    let half = (p.t3 - p.t0) / 2.0;
    for i in 0..=200 {
        let tau = half * i as f64 / 200.0;
        let (a, b) = (p.velocity_at(p.t0 + tau), p.velocity_at(p.t3 - tau));
        if (a - b).abs() > 1e-9 {
            return Err(format!("v(t0+{tau}) = {a} but v(t3-{tau}) = {b}"));
        }
    }
    let a = p.effective_vmax / (p.t1 - p.t0);
    let sign = if req.end < req.start { -1.0 } else { 1.0 };
    for s in &p.samples {
        let expected = if s.t < p.t1 {
            a
        } else if s.t < p.t2 {
            0.0
        } else {
            -a
        };
        if (s.acceleration - sign * expected).abs() > 1e-9 * a {
            return Err(format!("acceleration {} at t = {}", s.acceleration, s.t));
        }
    }
    Ok(())
}

/// Position branches meet at the phase boundaries; the ramp-down branch is
/// twice the leading-`v/2` form it is sometimes written in.
pub fn check_branch_continuity(req: &MotionRequest) -> Result<(), String> {
    let p = make_profile(req).map_err(|e| e.to_string())?;
    let scale = p.effective_vmax * p.t3;
    let [up, plateau, _] = p.distance_branches(p.t1);
    if (up - plateau).abs() > 1e-12 * scale {
        return Err(format!("branches 1/2 differ at t1: {up} vs {plateau}"));
    }
    let [_, plateau, down] = p.distance_branches(p.t2);
    if (plateau - down).abs() > 1e-12 * scale {
        return Err(format!("branches 2/3 differ at t2: {plateau} vs {down}"));
    }
    let (t0, t1, t2, t3, v) = (p.t0, p.t1, p.t2, p.t3, p.effective_vmax);
    for i in 0..=10 {
        let t = t2 + (t3 - t2) * i as f64 / 10.0;
        let halved = v / 2.0
            * ((-t * t / 2.0 + t * t3) / (t3 - t2)
                + (t2 * t2 / 2.0 - t2 * t3) / (t3 - t2)
                + (t2 - t0) / 2.0
                + (t2 - t1) / 2.0);
        let down = p.distance_branches(t)[2];
        if (down - 2.0 * halved).abs() > 1e-12 * scale {
            return Err(format!(
                "ramp-down branch {down} is not twice {halved} at t = {t}"
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Plans

pub fn arb_time_ini(first: bool) -> BoxedStrategy<TimeIni> {
    if first {
        (0u32..300)
            .prop_map(|k| TimeIni::At(k as f64 * 0.01))
            .boxed()
    } else {
        prop_oneof![
            3 => Just(TimeIni::Append),
            1 => Just(TimeIni::Simultan),
            1 => (0u32..2000).prop_map(|k| TimeIni::At(k as f64 * 0.01)),
        ]
        .boxed()
    }
}

fn motion_task(
    kind: TaskKind,
    time_ini: TimeIni,
    duration: f64,
    from: f64,
    to: f64,
    vmax: f64,
    load: f64,
) -> TaskSpec {
    TaskSpec {
        load,
        ..TaskSpec::motion(kind, time_ini, duration, from, to, vmax)
    }
}

/// A task any forwarder can execute with geometry away from singular poses.
pub fn arb_forwarder_task(first: bool) -> impl Strategy<Value = TaskSpec> {
    (
        arb_time_ini(first),
        0..5u8,
        2.0..6.0f64,
        0.0..1.0f64,
        0.0..1.0f64,
        2.0..20.0f64,
        0.0..500.0f64,
        1..3u32,
    )
        .prop_map(|(time_ini, kind, duration, a, b, vmax, load, repeats)| {
            let lerp = |lo: f64, hi: f64, x: f64| lo + (hi - lo) * x;
            let mut spec = match kind {
                0 => motion_task(
                    TaskKind::BoomLift,
                    time_ini,
                    duration,
                    lerp(20.0, 70.0, a),
                    lerp(20.0, 70.0, b),
                    vmax,
                    load,
                ),
                1 => motion_task(
                    TaskKind::BoomLower,
                    time_ini,
                    duration,
                    lerp(20.0, 70.0, a),
                    lerp(20.0, 70.0, b),
                    vmax,
                    load,
                ),
                2 => motion_task(
                    TaskKind::ArmLift,
                    time_ini,
                    duration,
                    lerp(70.0, 150.0, a),
                    lerp(70.0, 150.0, b),
                    vmax,
                    load,
                ),
                3 => motion_task(
                    TaskKind::Rotate,
                    time_ini,
                    duration,
                    lerp(-90.0, 90.0, a),
                    lerp(-90.0, 90.0, b),
                    vmax * 2.0,
                    load,
                ),
                _ => TaskSpec::wait(time_ini, duration),
            };
            spec.repeats = repeats;
            spec
        })
}

pub fn arb_forwarder_plan() -> impl Strategy<Value = PlanDocument> {
    (
        arb_forwarder_task(true),
        prop::collection::vec(arb_forwarder_task(false), 0..5),
    )
        .prop_map(|(first, rest)| {
            let mut tasks = vec![first];
            tasks.extend(rest);
            PlanDocument {
                machine: "forest_forwarder".into(),
                dt: 0.01,
                tasks,
            }
        })
}

pub fn check_additivity(doc: &PlanDocument, m: &MachineParams) -> Result<(), String> {
    let profile = run(doc, m);
    for k in 0..profile.time.len() {
        let sum: f64 = profile.components.values().map(|c| c[k]).sum();
        if sum.to_bits() != profile.total[k].to_bits() {
            return Err(format!(
                "row {k}: total {} but components sum to {sum}",
                profile.total[k]
            ));
        }
    }
    let rows = steps_for(profile.horizon(), doc.dt) + 1;
    if profile.time.len() != rows {
        return Err(format!(
            "{} rows for horizon {}",
            profile.time.len(),
            profile.horizon()
        ));
    }
    Ok(())
}

/// Shifting the first absolute start by `shift_steps · dt` moves every
/// component series by the same number of rows.
pub fn check_time_shift(
    doc: &PlanDocument,
    m: &MachineParams,
    shift_steps: u32,
) -> Result<(), String> {
    let mut shifted = doc.clone();
    for spec in &mut shifted.tasks {
        if let TimeIni::At(t) = spec.time_ini {
            spec.time_ini = TimeIni::At(((t / doc.dt).round() + shift_steps as f64) * doc.dt);
        }
    }
    let mut snapped = doc.clone();
    for spec in &mut snapped.tasks {
        if let TimeIni::At(t) = spec.time_ini {
            spec.time_ini = TimeIni::At((t / doc.dt).round() * doc.dt);
        }
    }
    let a = run(&snapped, m);
    let b = run(&shifted, m);
    let s = shift_steps as usize;
    for c in [
        Component::Boom,
        Component::Arm,
        Component::Swing,
        Component::Idle,
    ] {
        let (pa, pb) = (a.power(c), b.power(c));
        if pb.len() < pa.len() + s {
            return Err(format!(
                "{c}: shifted profile has {} rows, expected ≥ {}",
                pb.len(),
                pa.len() + s
            ));
        }
        if pb[..s].iter().any(|&p| p != 0.0) {
            return Err(format!("{c}: power before the shifted start"));
        }
        for (k, &p) in pa.iter().enumerate() {
            if p.to_bits() != pb[k + s].to_bits() {
                return Err(format!(
                    "{c}: row {k} = {p} but shifted row = {}",
                    pb[k + s]
                ));
            }
        }
        if pb[pa.len() + s..].iter().any(|&p| p != 0.0) {
            return Err(format!("{c}: power after the shifted horizon"));
        }
    }
    Ok(())
}

/// Scales every mass and the load by `k`.
pub fn scale_masses(m: &MachineParams, k: f64) -> MachineParams {
    let mut out = m.clone();
    out.m_boom *= k;
    out.m_arm *= k;
    out.m_attachment *= k;
    if let Some(c) = out.cabin.as_mut() {
        c.mass *= k;
    }
    out
}

/// Lifting force and power samples scale by exactly `k` with all masses.
pub fn check_mass_linearity(m: &MachineParams, spec: &TaskSpec, k: f64) -> Result<(), String> {
    let mut doc = PlanDocument {
        machine: m.kind.to_string(),
        dt: 0.01,
        tasks: vec![spec.clone()],
    };
    let base = resolve_timeline(&doc).unwrap();
    let run_a = lpg_core::simulate_task(&base.tasks[0], m, doc.dt).map_err(|e| e.to_string())?;
    doc.tasks[0].load *= k;
    let heavy = resolve_timeline(&doc).unwrap();
    let run_b = lpg_core::simulate_task(&heavy.tasks[0], &scale_masses(m, k), doc.dt)
        .map_err(|e| e.to_string())?;
    let (fa, fb) = (run_a.series.force_n.unwrap(), run_b.series.force_n.unwrap());
    for (i, (a, b)) in fa.iter().zip(&fb).enumerate() {
        if (b - k * a).abs() > 1e-9 * (k * a).abs().max(1e-9) {
            return Err(format!("sample {i}: F = {a}, scaled F = {b}, k = {k}"));
        }
    }
    let (pa, pb) = (&run_a.series.power_w, &run_b.series.power_w);
    for (i, (a, b)) in pa.iter().zip(pb).enumerate() {
        if (b - k * a).abs() > 1e-9 * (k * a).abs().max(1e-9) {
            return Err(format!("sample {i}: P = {a}, scaled P = {b}, k = {k}"));
        }
    }
    Ok(())
}

/// `|l_CD − l_BC| ≤ l ≤ l_CD + l_BC` for the forwarder arm cylinder.
pub fn check_triangle_bounds(l_cd: f64, l_bc: f64, theta2: f64) -> Result<(), String> {
    let mut m = forwarder();
    m.arm_linkage = lpg_core::machine::ArmLinkage::Forwarder {
        l_joint_cd: l_cd,
        l_joint_bc: l_bc,
        l_arm_bucket: 3.5,
    };
    let l = lpg_core::forwarder::ff_arm_cyl_length(&m, theta2).map_err(|e| e.to_string())?;
    let slack = 1e-12 * (l_cd + l_bc);
    if l < (l_cd - l_bc).abs() - slack || l > l_cd + l_bc + slack {
        return Err(format!(
            "l = {l} outside [{}, {}]",
            (l_cd - l_bc).abs(),
            l_cd + l_bc
        ));
    }
    Ok(())
}

pub fn arb_lift_spec() -> impl Strategy<Value = (bool, TaskSpec)> {
    (
        prop::bool::ANY,
        0..3u8,
        2.0..6.0f64,
        0.0..1.0f64,
        0.0..1.0f64,
        0.0..2000.0f64,
    )
        .prop_map(|(handler, kind, duration, a, b, load)| {
            let lerp = |lo: f64, hi: f64, x: f64| lo + (hi - lo) * x;
            let (kind, lo, hi) = match (handler, kind) {
                (_, 0) => (TaskKind::BoomLift, 20.0, 70.0),
                (true, _) => (TaskKind::ArmLiftMh, 60.0, 140.0),
                (false, _) => (TaskKind::ArmLift, 70.0, 150.0),
            };
            let mut spec = motion_task(
                kind,
                TimeIni::At(0.0),
                duration,
                lerp(lo, hi, a),
                lerp(lo, hi, b),
                10.0,
                load,
            );
            match kind.joint() {
                Some(lpg_core::plan::Joint::Boom) => spec.arm_fin_ang = Some(100.0),
                _ => spec.boom_fin_ang = Some(45.0),
            }
            (handler, spec)
        })
}
