//! Static SVG plots of a load profile.

use std::path::Path;

use lpg_core::aggregate::grid_index;
use lpg_core::plan::Joint;
use lpg_core::{Component, LoadProfile};
use plotters::coord::Shift;
use plotters::prelude::*;

const SIZE: (u32, u32) = (1200, 700);

fn colour(i: usize) -> RGBColor {
    [BLUE, RED, GREEN, MAGENTA, BLACK][i % 5]
}

fn range(series: &[&[f64]]) -> (f64, f64) {
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-9);
    (lo - pad, hi + pad)
}

fn draw_panel(
    area: &DrawingArea<SVGBackend, Shift>,
    caption: &str,
    y_label: &str,
    time: &[f64],
    lines: &[(&str, &[f64])],
) -> Result<(), String> {
    let t_end = time.last().copied().unwrap_or(1.0).max(1e-9);
    let columns: Vec<&[f64]> = lines.iter().map(|(_, s)| *s).collect();
    let (y0, y1) = range(&columns);
    let mut chart = ChartBuilder::on(area)
        .caption(caption, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..t_end, y0..y1)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc(y_label)
        .draw()
        .map_err(|e| e.to_string())?;
    for (i, (name, values)) in lines.iter().enumerate() {
        let c = colour(i);
        chart
            .draw_series(LineSeries::new(
                time.iter().copied().zip(values.iter().copied()),
                &c,
            ))
            .map_err(|e| e.to_string())?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| e.to_string())?;
    Ok(())
}

/// Per-component and total power over time.
pub fn power(profile: &LoadProfile, path: &Path) -> Result<(), String> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut lines: Vec<(&str, &[f64])> = Component::ACTUATORS
        .iter()
        .map(|&c| (c.name(), profile.power(c)))
        .collect();
    if profile.power(Component::Idle).iter().any(|&p| p != 0.0) {
        lines.push(("idle", profile.power(Component::Idle)));
    }
    lines.push(("total", &profile.total));
    draw_panel(&root, &profile.machine, "P [W]", &profile.time, &lines)?;
    root.present().map_err(|e| e.to_string())
}

/// Joint angle and angular velocity on the global grid. Angles are held
/// between tasks; velocity is zero outside task windows.
fn joint_tracks(profile: &LoadProfile, joint: Joint) -> Option<(Vec<f64>, Vec<f64>)> {
    let rows = profile.time.len();
    let mut position = vec![f64::NAN; rows];
    let mut velocity = vec![0.0; rows];
    let mut any = false;
    for (a, run) in profile.annotations.iter().zip(&profile.runs) {
        let Some(motion) = run
            .profile
            .as_ref()
            .filter(|_| a.task.joint() == Some(joint))
        else {
            continue;
        };
        any = true;
        let first = grid_index(a.start_s, profile.dt);
        for (k, s) in motion.samples.iter().enumerate() {
            if let Some(slot) = position.get_mut(first + k) {
                *slot = s.position;
                velocity[first + k] += s.velocity;
            }
        }
    }
    if !any {
        return None;
    }
    let first_known = position.iter().copied().find(|v| !v.is_nan())?;
    let mut last = first_known;
    for p in &mut position {
        if p.is_nan() {
            *p = last;
        } else {
            last = *p;
        }
    }
    Some((position, velocity))
}

pub fn joints(profile: &LoadProfile, path: &Path) -> Result<(), String> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let tracks: Vec<(&str, Vec<f64>, Vec<f64>)> = [
        (Joint::Boom, "boom"),
        (Joint::Arm, "arm"),
        (Joint::Slew, "swing"),
    ]
    .into_iter()
    .filter_map(|(j, name)| joint_tracks(profile, j).map(|(p, v)| (name, p, v)))
    .collect();
    let (top, bottom) = root.split_vertically(SIZE.1 / 2);
    let positions: Vec<(&str, &[f64])> =
        tracks.iter().map(|(n, p, _)| (*n, p.as_slice())).collect();
    let velocities: Vec<(&str, &[f64])> =
        tracks.iter().map(|(n, _, v)| (*n, v.as_slice())).collect();
    draw_panel(
        &top,
        "joint angle",
        "angle [deg]",
        &profile.time,
        &positions,
    )?;
    draw_panel(
        &bottom,
        "joint velocity",
        "velocity [deg/s]",
        &profile.time,
        &velocities,
    )?;
    root.present().map_err(|e| e.to_string())
}
