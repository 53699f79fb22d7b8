//! Instances, tours and plans, plus the flight-time / battery cost model.
//!
//! Coordinates are local Cartesian meters, times are seconds and battery
//! figures are percent of one full charge. Every segment is a two-element
//! "set": it may be flown either `Forward` (a to b) or `Reverse` (b to a),
//! and a plan must fly each segment exactly once.

mod generate;

pub use generate::{generate_instance, GeneratorParams};

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn planar(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Point at fraction `f` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Point, f: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * f,
            self.y + (other.y - self.y) * f,
            self.z + (other.z - self.z) * f,
        )
    }
}

impl From<[f64; 3]> for Point {
    fn from(v: [f64; 3]) -> Self {
        Point::new(v[0], v[1], v[2])
    }
}

impl From<Point> for [f64; 3] {
    fn from(p: Point) -> Self {
        [p.x, p.y, p.z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// a -> b
    Forward,
    /// b -> a
    Reverse,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Reverse];

    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Forward => f.write_str("forward"),
            Direction::Reverse => f.write_str("reverse"),
        }
    }
}

/// A power-line span between two pylons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: u32,
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(id: u32, a: Point, b: Point) -> Self {
        Self { id, a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    /// (entry, exit) endpoints when flown in `dir`.
    pub fn endpoints(&self, dir: Direction) -> (Point, Point) {
        match dir {
            Direction::Forward => (self.a, self.b),
            Direction::Reverse => (self.b, self.a),
        }
    }
}

/// Two-rate battery model: constant consumption while transiting at `v_max`
/// and while inspecting at `v_insp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// percent per second while transiting
    pub rate_transit: f64,
    /// percent per second while inspecting
    pub rate_insp: f64,
}

/// Calibration of [`EnergyModel`] against a reference mission: a flight of
/// `reference_distance` meters, of which `inspection_fraction` is flown at
/// inspection speed, drains exactly 100 % of the battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCalibration {
    pub reference_distance: f64,
    pub inspection_fraction: f64,
    /// rate_transit / rate_insp
    pub transit_to_inspection_ratio: f64,
}

impl Default for EnergyCalibration {
    fn default() -> Self {
        Self {
            reference_distance: 700.0,
            inspection_fraction: 0.5,
            transit_to_inspection_ratio: 1.0,
        }
    }
}

impl EnergyModel {
    pub fn new(rate_transit: f64, rate_insp: f64) -> Result<Self> {
        let m = Self { rate_transit, rate_insp };
        m.check()?;
        Ok(m)
    }

    pub fn calibrated(cal: &EnergyCalibration, v_max: f64, v_insp: f64) -> Result<Self> {
        let f = cal.inspection_fraction;
        if !(cal.reference_distance > 0.0) || !(0.0..=1.0).contains(&f) {
            return Err(Error::Parameter(format!("bad energy calibration {cal:?}")));
        }
        if !(cal.transit_to_inspection_ratio > 0.0) || !(v_max > 0.0) || !(v_insp > 0.0) {
            return Err(Error::Parameter(format!("bad energy calibration {cal:?}")));
        }
        let d = cal.reference_distance;
        // 100 = r_i * (f d / v_insp) + ratio * r_i * ((1 - f) d / v_max)
        let weighted_time =
            f * d / v_insp + cal.transit_to_inspection_ratio * (1.0 - f) * d / v_max;
        let rate_insp = 100.0 / weighted_time;
        Self::new(rate_insp * cal.transit_to_inspection_ratio, rate_insp)
    }

    fn check(&self) -> Result<()> {
        if self.rate_transit > 0.0
            && self.rate_insp > 0.0
            && self.rate_transit.is_finite()
            && self.rate_insp.is_finite()
        {
            Ok(())
        } else {
            Err(Error::Parameter(format!("energy rates must be positive: {self:?}")))
        }
    }
}

/// Seconds needed to fly from `from` to `to` at `speed`.
pub fn leg_time(from: &Point, to: &Point, speed: f64) -> Result<f64> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::Parameter(format!("speed must be positive, got {speed}")));
    }
    Ok(from.distance(to) / speed)
}

/// Velocities and energy rates, i.e. everything needed to price a leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightModel {
    pub v_max: f64,
    pub v_insp: f64,
    pub energy: EnergyModel,
}

impl FlightModel {
    pub fn transit_time(&self, from: &Point, to: &Point) -> f64 {
        from.distance(to) / self.v_max
    }

    pub fn transit_cost(&self, from: &Point, to: &Point) -> f64 {
        self.transit_time(from, to) * self.energy.rate_transit
    }

    pub fn inspect_time(&self, seg: &Segment) -> f64 {
        seg.length() / self.v_insp
    }

    pub fn inspect_cost(&self, seg: &Segment) -> f64 {
        self.inspect_time(seg) * self.energy.rate_insp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub depot: Point,
    pub segments: Vec<Segment>,
    pub n_vehicles: usize,
    pub budget_percent: f64,
    pub v_max: f64,
    pub v_insp: f64,
    pub energy: EnergyModel,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        if self.n_vehicles < 1 {
            return Err(Error::Validation("n_vehicles must be at least 1".into()));
        }
        if !(self.budget_percent > 0.0) {
            return Err(Error::Validation("budget_percent must be positive".into()));
        }
        if !(self.v_insp > 0.0) || !(self.v_max >= self.v_insp) || !self.v_max.is_finite() {
            return Err(Error::Validation(format!(
                "velocities must satisfy v_max >= v_insp > 0 (v_max={}, v_insp={})",
                self.v_max, self.v_insp
            )));
        }
        self.energy.check().map_err(|e| Error::Validation(e.to_string()))?;
        if !self.depot.is_finite() {
            return Err(Error::Validation("depot coordinates must be finite".into()));
        }
        let mut ids = HashSet::new();
        for s in &self.segments {
            if !s.a.is_finite() || !s.b.is_finite() {
                return Err(Error::Validation(format!("segment {} has non-finite endpoint", s.id)));
            }
            if !(s.length() > 0.0) {
                return Err(Error::Validation(format!("segment {} has zero length", s.id)));
            }
            if !ids.insert(s.id) {
                return Err(Error::Validation(format!("duplicate segment id {}", s.id)));
            }
        }
        Ok(())
    }

    pub fn flight(&self) -> FlightModel {
        FlightModel { v_max: self.v_max, v_insp: self.v_insp, energy: self.energy }
    }

    pub fn n_seg(&self) -> usize {
        self.segments.len()
    }

    /// The initial planning problem: every vehicle at the depot with a full
    /// budget, every segment outstanding.
    pub fn problem(&self) -> Problem {
        let vehicles = (0..self.n_vehicles)
            .map(|id| VehicleSlot { vehicle_id: id, start: self.depot, budget: self.budget_percent })
            .collect();
        Problem::new(self.depot, self.segments.clone(), vehicles, self.flight())
    }
}

/// A vehicle available for routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSlot {
    pub vehicle_id: usize,
    pub start: Point,
    pub budget: f64,
}

/// A routing problem: the segments still to fly and the vehicles that may
/// fly them. Initial plans and re-plans are both expressed this way.
#[derive(Debug, Clone)]
pub struct Problem {
    pub depot: Point,
    pub segments: Vec<Segment>,
    pub vehicles: Vec<VehicleSlot>,
    pub flight: FlightModel,
    index: HashMap<u32, usize>,
}

impl Problem {
    pub fn new(depot: Point, segments: Vec<Segment>, vehicles: Vec<VehicleSlot>, flight: FlightModel) -> Self {
        let index = segments.iter().enumerate().map(|(i, s)| (s.id, i)).collect();
        Self { depot, segments, vehicles, flight, index }
    }

    pub fn segment(&self, id: u32) -> Option<&Segment> {
        self.index.get(&id).map(|&i| &self.segments[i])
    }

    pub fn segment_index(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.vehicles.iter().map(|v| v.budget).collect()
    }

    /// One empty tour per vehicle.
    pub fn empty_plan(&self) -> Plan {
        Plan {
            tours: self.vehicles.iter().map(|v| Tour::new(v.vehicle_id, v.start, self.depot)).collect(),
        }
    }

    pub fn tour_cost(&self, tour: &Tour) -> Result<TourCost> {
        let fm = &self.flight;
        let mut cost = TourCost::default();
        let mut at = tour.start;
        for v in &tour.visits {
            let seg = self
                .segment(v.segment_id)
                .ok_or_else(|| Error::Validation(format!("unknown segment id {}", v.segment_id)))?;
            let (entry, exit) = seg.endpoints(v.direction);
            let t = fm.transit_time(&at, &entry);
            cost.duration += t;
            cost.battery += t * fm.energy.rate_transit;
            let t = fm.inspect_time(seg);
            cost.duration += t;
            cost.battery += t * fm.energy.rate_insp;
            at = exit;
        }
        let t = fm.transit_time(&at, &tour.end);
        cost.duration += t;
        cost.battery += t * fm.energy.rate_transit;
        Ok(cost)
    }

    pub fn tour_costs(&self, plan: &Plan) -> Result<Vec<TourCost>> {
        plan.tours.iter().map(|t| self.tour_cost(t)).collect()
    }

    /// Coverage, budget and endpoint checks. An empty list means feasible.
    pub fn validate(&self, plan: &Plan) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen: HashMap<u32, usize> = HashMap::new();
        for tour in &plan.tours {
            for v in &tour.visits {
                if self.segment(v.segment_id).is_none() {
                    out.push(Violation::UnknownSegment { segment_id: v.segment_id, vehicle_id: tour.vehicle_id });
                } else {
                    *seen.entry(v.segment_id).or_default() += 1;
                }
            }
        }
        for s in &self.segments {
            match seen.get(&s.id).copied().unwrap_or(0) {
                0 => out.push(Violation::Uncovered { segment_id: s.id }),
                1 => {}
                n => out.push(Violation::Duplicate { segment_id: s.id, count: n }),
            }
        }
        let mut tour_seen = HashSet::new();
        for tour in &plan.tours {
            let Some(slot) = self.vehicles.iter().find(|v| v.vehicle_id == tour.vehicle_id) else {
                out.push(Violation::UnknownVehicle { vehicle_id: tour.vehicle_id });
                continue;
            };
            if !tour_seen.insert(tour.vehicle_id) {
                out.push(Violation::DuplicateTour { vehicle_id: tour.vehicle_id });
            }
            if tour.end != self.depot {
                out.push(Violation::BadEndpoint { vehicle_id: tour.vehicle_id, expected: self.depot, found: tour.end });
            }
            if tour.start != slot.start {
                out.push(Violation::BadEndpoint { vehicle_id: tour.vehicle_id, expected: slot.start, found: tour.start });
            }
            if let Ok(c) = self.tour_cost(tour) {
                if c.battery > slot.budget {
                    out.push(Violation::OverBudget {
                        vehicle_id: tour.vehicle_id,
                        cost: c.battery,
                        budget: slot.budget,
                        overshoot: c.battery - slot.budget,
                    });
                }
            }
        }
        out
    }
}

/// Battery (percent) and flight time (seconds) of a tour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TourCost {
    pub battery: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(u32, Direction)", into = "(u32, Direction)")]
pub struct Visit {
    pub segment_id: u32,
    pub direction: Direction,
}

impl Visit {
    pub fn new(segment_id: u32, direction: Direction) -> Self {
        Self { segment_id, direction }
    }
}

impl From<(u32, Direction)> for Visit {
    fn from((segment_id, direction): (u32, Direction)) -> Self {
        Visit { segment_id, direction }
    }
}

impl From<Visit> for (u32, Direction) {
    fn from(v: Visit) -> Self {
        (v.segment_id, v.direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub vehicle_id: usize,
    pub start: Point,
    pub end: Point,
    pub visits: Vec<Visit>,
}

impl Tour {
    pub fn new(vehicle_id: usize, start: Point, end: Point) -> Self {
        Self { vehicle_id, start, end, visits: Vec::new() }
    }

    pub fn with_visits(mut self, visits: Vec<Visit>) -> Self {
        self.visits = visits;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub tours: Vec<Tour>,
}

impl Plan {
    pub fn n_visits(&self) -> usize {
        self.tours.iter().map(|t| t.visits.len()).sum()
    }

    pub fn tour(&self, vehicle_id: usize) -> Option<&Tour> {
        self.tours.iter().find(|t| t.vehicle_id == vehicle_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Uncovered { segment_id: u32 },
    Duplicate { segment_id: u32, count: usize },
    UnknownSegment { segment_id: u32, vehicle_id: usize },
    UnknownVehicle { vehicle_id: usize },
    DuplicateTour { vehicle_id: usize },
    BadEndpoint { vehicle_id: usize, expected: Point, found: Point },
    OverBudget { vehicle_id: usize, cost: f64, budget: f64, overshoot: f64 },
}

impl Violation {
    pub fn is_coverage(&self) -> bool {
        matches!(self, Violation::Uncovered { .. } | Violation::Duplicate { .. } | Violation::UnknownSegment { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Uncovered { segment_id } => write!(f, "segment {segment_id} not covered"),
            Violation::Duplicate { segment_id, count } => write!(f, "segment {segment_id} visited {count} times"),
            Violation::UnknownSegment { segment_id, vehicle_id } => {
                write!(f, "vehicle {vehicle_id} visits unknown segment {segment_id}")
            }
            Violation::UnknownVehicle { vehicle_id } => write!(f, "tour for unknown vehicle {vehicle_id}"),
            Violation::DuplicateTour { vehicle_id } => write!(f, "vehicle {vehicle_id} has more than one tour"),
            Violation::BadEndpoint { vehicle_id, expected, found } => {
                write!(f, "vehicle {vehicle_id}: endpoint {found:?}, expected {expected:?}")
            }
            Violation::OverBudget { vehicle_id, cost, budget, overshoot } => {
                write!(f, "vehicle {vehicle_id}: cost {cost:.3} % exceeds budget {budget:.3} % by {overshoot:.3}")
            }
        }
    }
}

/// Battery cost and duration of `tour` within `instance`.
pub fn tour_cost(instance: &Instance, tour: &Tour) -> Result<TourCost> {
    instance.problem().tour_cost(tour)
}

pub fn validate_plan(instance: &Instance, plan: &Plan) -> Vec<Violation> {
    instance.problem().validate(plan)
}
