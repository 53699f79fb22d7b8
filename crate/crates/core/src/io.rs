//! On-disk formats: instance and plan JSON, window reports, CSV exports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::costs::CostKind;
use crate::error::{Error, Result};
use crate::failure::{MissionTimeline, WindowReport, WindowSample};
use crate::model::{Instance, Plan, Point, Problem, Tour, Violation, Visit};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourRecord {
    pub vehicle_id: usize,
    pub start: Point,
    pub end: Point,
    pub visits: Vec<Visit>,
    pub battery_cost: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub format_version: u32,
    pub instance_hash: String,
    pub cost_function: CostKind,
    pub k_c: f64,
    pub cost_value: f64,
    pub feasible: bool,
    pub tours: Vec<TourRecord>,
    #[serde(default)]
    pub violations: Vec<Violation>,
}

impl PlanFile {
    pub fn new(
        problem: &Problem,
        instance_hash: String,
        plan: &Plan,
        cost_function: CostKind,
        k_c: f64,
        cost_value: f64,
    ) -> Result<Self> {
        let violations = problem.validate(plan);
        let tours = plan
            .tours
            .iter()
            .map(|t| {
                let c = problem.tour_cost(t)?;
                Ok(TourRecord {
                    vehicle_id: t.vehicle_id,
                    start: t.start,
                    end: t.end,
                    visits: t.visits.clone(),
                    battery_cost: c.battery,
                    duration: c.duration,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            format_version: FORMAT_VERSION,
            instance_hash,
            cost_function,
            k_c,
            cost_value,
            feasible: violations.is_empty(),
            tours,
            violations,
        })
    }

    pub fn plan(&self) -> Plan {
        Plan {
            tours: self
                .tours
                .iter()
                .map(|r| Tour { vehicle_id: r.vehicle_id, start: r.start, end: r.end, visits: r.visits.clone() })
                .collect(),
        }
    }
}

fn check_version(found: u32) -> Result<()> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::FormatVersion { found, expected: FORMAT_VERSION })
    }
}

/// SHA-256 over the canonical JSON encoding of the instance.
pub fn instance_hash(instance: &Instance) -> String {
    let bytes = serde_json::to_vec(instance).expect("instance serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn instance_from_json(s: &str) -> Result<Instance> {
    let f: InstanceFile = serde_json::from_str(s)?;
    check_version(f.format_version)?;
    f.instance.validate()?;
    Ok(f.instance)
}

pub fn instance_to_json(instance: &Instance) -> Result<String> {
    let f = InstanceFile { format_version: FORMAT_VERSION, instance: instance.clone() };
    Ok(serde_json::to_string_pretty(&f)?)
}

pub fn plan_from_json(s: &str) -> Result<PlanFile> {
    let f: PlanFile = serde_json::from_str(s)?;
    check_version(f.format_version)?;
    Ok(f)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    write_text(path, &instance_to_json(instance)?)
}

pub fn read_plan(path: &Path) -> Result<PlanFile> {
    plan_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(value)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimelineRow {
    pub t: f64,
    pub vehicle: usize,
    pub battery_percent: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub fn timeline_rows(timeline: &MissionTimeline) -> Vec<TimelineRow> {
    timeline
        .vehicles
        .iter()
        .flat_map(|v| {
            v.events.iter().map(move |e| TimelineRow {
                t: e.t,
                vehicle: v.vehicle_id,
                battery_percent: e.battery,
                x: e.position.x,
                y: e.position.y,
                z: e.position.z,
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_timeline_csv(path: &Path, timeline: &MissionTimeline) -> Result<()> {
    write_csv(path, &timeline_rows(timeline))
}

pub fn write_samples_csv(path: &Path, report: &WindowReport) -> Result<()> {
    write_csv::<WindowSample>(path, &report.samples)
}
