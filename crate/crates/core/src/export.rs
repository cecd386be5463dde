//! Profile exports: CSV time series, JSON document and a per-task summary.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::aggregate::LoadProfile;
use crate::error::{Error, Result};
use crate::series::Component;

/// Column header of the CSV export; `p_idle_w` appears only when the
/// machine draws idle power.
pub fn csv_header(with_idle: bool) -> Vec<&'static str> {
    let mut header = vec!["t_s", "p_boom_w", "p_arm_w", "p_swing_w"];
    if with_idle {
        header.push("p_idle_w");
    }
    header.push("p_total_w");
    header
}

fn has_idle(profile: &LoadProfile) -> bool {
    profile.power(Component::Idle).iter().any(|&p| p != 0.0)
}

/// Writes one row per grid sample. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_csv<W: Write>(profile: &LoadProfile, writer: W) -> Result<()> {
    let with_idle = has_idle(profile);
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(csv_header(with_idle))?;
    let mut columns: Vec<&[f64]> = vec![&profile.time];
    columns.extend(Component::ACTUATORS.iter().map(|&c| profile.power(c)));
    if with_idle {
        columns.push(profile.power(Component::Idle));
    }
    columns.push(&profile.total);
    for k in 0..profile.time.len() {
        out.write_record(columns.iter().map(|c| c[k].to_string()))?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn csv_string(profile: &LoadProfile) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(profile, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// A CSV export read back into memory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<CsvTable> {
    let mut input = csv::Reader::from_reader(reader);
    let header: Vec<String> = input.headers()?.iter().map(str::to_owned).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (row, record) in input.records().enumerate() {
        let record = record?;
        for (i, field) in record.iter().enumerate() {
            let value = field.parse::<f64>().map_err(|e| Error::Parse {
                line: row + 2,
                column: i + 1,
                message: format!("`{field}`: {e}"),
            })?;
            columns[i].push(value);
        }
    }
    Ok(CsvTable { header, columns })
}

pub fn write_csv_file(profile: &LoadProfile, path: &Path) -> Result<()> {
    crate::io::write_text(path, &csv_string(profile)?)
}

pub fn to_json(profile: &LoadProfile) -> Result<String> {
    Ok(serde_json::to_string_pretty(profile)?)
}

/// Per-task peak power and energy, plus the cycle totals.
pub fn summary_table(profile: &LoadProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:<13} {:<6} {:>8} {:>8} {:>12} {:>14}  note",
        "#", "task", "comp", "start_s", "end_s", "peak_W", "energy_J"
    );
    for a in &profile.annotations {
        let mut note = match a.adjustment {
            crate::kinematics::Adjustment::None => String::new(),
            crate::kinematics::Adjustment::DurationIncreased { requested_s, .. } => {
                format!("duration stretched from {requested_s} s")
            }
            crate::kinematics::Adjustment::VelocityReduced {
                requested,
                effective,
            } => {
                format!("vmax {requested} -> {effective:.3} deg/s")
            }
        };
        if a.over_center {
            if !note.is_empty() {
                note.push_str("; ");
            }
            note.push_str("over-center");
        }
        let label = if a.repeat > 0 {
            format!("{}.{}", a.index, a.repeat)
        } else {
            a.index.to_string()
        };
        let _ = writeln!(
            out,
            "{:>3}  {:<13} {:<6} {:>8.3} {:>8.3} {:>12.1} {:>14.1}  {}",
            label,
            a.task.name(),
            a.component.name(),
            a.start_s,
            a.end_s,
            a.peak_power_w,
            a.energy_j,
            note
        );
    }
    let _ = writeln!(
        out,
        "horizon {:.3} s, peak total {:.1} W, total energy {:.1} J",
        profile.horizon(),
        profile.peak_total(),
        profile.total_energy_j()
    );
    out
}
