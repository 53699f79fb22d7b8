//! Single-vehicle failure: mission timelines, residual problems, re-planning
//! and the re-plan window sweep.
//!
//! All vehicles launch at t = 0. A segment counts as inspected only once
//! its inspection leg completes. When vehicle `f` fails at `t`:
//!
//! * `f`'s in-progress and future segments become outstanding;
//! * a survivor that is inspecting finishes that segment and commits at
//!   its exit endpoint;
//! * a survivor in transit (or idle) commits immediately where it is.
//!
//! Survivors keep whatever battery they have left at their commit point.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grasp::{plan_value, solve_problem, SolverConfig};
use crate::model::{Plan, Point, Problem, VehicleSlot, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TransitStart,
    InspectStart,
    InspectEnd,
    DepotArrival,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub segment_id: Option<u32>,
    pub position: Point,
    /// cumulative battery consumed, percent
    pub battery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTimeline {
    pub vehicle_id: usize,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionTimeline {
    pub vehicles: Vec<VehicleTimeline>,
    pub t_max: f64,
}

/// Where a vehicle is and what it is doing at some instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VehicleState {
    Transit { position: Point, battery: f64 },
    Inspecting { segment_id: u32, position: Point, battery: f64, exit: Point, end_t: f64, end_battery: f64 },
    Idle { position: Point, battery: f64 },
}

impl VehicleTimeline {
    pub fn final_battery(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.battery)
    }

    pub fn end_time(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.t)
    }

    pub fn state_at(&self, t: f64) -> VehicleState {
        let k = self.events.partition_point(|e| e.t <= t).saturating_sub(1);
        let e = &self.events[k];
        let Some(next) = self.events.get(k + 1) else {
            return VehicleState::Idle { position: e.position, battery: e.battery };
        };
        let span = next.t - e.t;
        let f = if span > 0.0 { ((t - e.t) / span).clamp(0.0, 1.0) } else { 1.0 };
        let position = e.position.lerp(&next.position, f);
        let battery = e.battery + (next.battery - e.battery) * f;
        match e.kind {
            EventKind::InspectStart => VehicleState::Inspecting {
                segment_id: e.segment_id.expect("inspection events carry a segment"),
                position,
                battery,
                exit: next.position,
                end_t: next.t,
                end_battery: next.battery,
            },
            _ => VehicleState::Transit { position, battery },
        }
    }

    /// Segments whose inspection completed at or before `t`.
    pub fn inspected_by(&self, t: f64) -> impl Iterator<Item = u32> + '_ {
        self.events
            .iter()
            .filter(move |e| e.kind == EventKind::InspectEnd && e.t <= t)
            .filter_map(|e| e.segment_id)
    }
}

impl MissionTimeline {
    pub fn vehicle(&self, vehicle_id: usize) -> Option<&VehicleTimeline> {
        self.vehicles.iter().find(|v| v.vehicle_id == vehicle_id)
    }

    pub fn event_times(&self) -> Vec<f64> {
        self.vehicles.iter().flat_map(|v| v.events.iter().map(|e| e.t)).collect()
    }
}

/// Timeline of `plan` where vehicle `i` departs at `offsets[i].0` with
/// `offsets[i].1` percent already consumed. Does not check feasibility.
pub fn timeline_with_offsets(problem: &Problem, plan: &Plan, offsets: &[(f64, f64)]) -> Result<MissionTimeline> {
    let fm = &problem.flight;
    let mut vehicles = Vec::with_capacity(plan.tours.len());
    for (i, tour) in plan.tours.iter().enumerate() {
        let (mut t, mut battery) = offsets.get(i).copied().unwrap_or((0.0, 0.0));
        let mut at = tour.start;
        let mut events = Vec::with_capacity(2 * tour.visits.len() + 2);
        if tour.visits.is_empty() && tour.start == tour.end {
            events.push(Event { t, kind: EventKind::DepotArrival, segment_id: None, position: at, battery });
            vehicles.push(VehicleTimeline { vehicle_id: tour.vehicle_id, events });
            continue;
        }
        events.push(Event { t, kind: EventKind::TransitStart, segment_id: None, position: at, battery });
        for v in &tour.visits {
            let seg = problem
                .segment(v.segment_id)
                .ok_or_else(|| Error::Validation(format!("unknown segment id {}", v.segment_id)))?;
            let (entry, exit) = seg.endpoints(v.direction);
            let dt = fm.transit_time(&at, &entry);
            t += dt;
            battery += dt * fm.energy.rate_transit;
            events.push(Event { t, kind: EventKind::InspectStart, segment_id: Some(seg.id), position: entry, battery });
            let dt = fm.inspect_time(seg);
            t += dt;
            battery += dt * fm.energy.rate_insp;
            events.push(Event { t, kind: EventKind::InspectEnd, segment_id: Some(seg.id), position: exit, battery });
            at = exit;
        }
        let dt = fm.transit_time(&at, &tour.end);
        t += dt;
        battery += dt * fm.energy.rate_transit;
        events.push(Event { t, kind: EventKind::DepotArrival, segment_id: None, position: tour.end, battery });
        vehicles.push(VehicleTimeline { vehicle_id: tour.vehicle_id, events });
    }
    let t_max = vehicles.iter().map(|v| v.end_time()).fold(0.0, f64::max);
    Ok(MissionTimeline { vehicles, t_max })
}

/// Piecewise-linear position and battery trajectories of a feasible plan.
pub fn build_timeline(problem: &Problem, plan: &Plan) -> Result<MissionTimeline> {
    let violations = problem.validate(plan);
    if !violations.is_empty() {
        return Err(Error::Parameter(format!(
            "timeline needs a feasible plan: {}",
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        )));
    }
    timeline_with_offsets(problem, plan, &[])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureScenario {
    pub failed_vehicle: usize,
    pub t_fail: f64,
}

#[derive(Debug, Clone)]
pub struct ResidualInstance {
    pub scenario: FailureScenario,
    /// Survivors at their commit points, outstanding segments only.
    pub problem: Problem,
    /// per survivor, same order as `problem.vehicles`
    pub commit_times: Vec<f64>,
    /// per survivor battery consumed up to the commit point
    pub consumed: Vec<f64>,
    /// segments inspected before the commit points, sorted
    pub inspected: Vec<u32>,
}

pub fn inject_failure(
    problem: &Problem,
    plan: &Plan,
    timeline: &MissionTimeline,
    scenario: FailureScenario,
) -> Result<ResidualInstance> {
    let t = scenario.t_fail;
    if !(0.0..=timeline.t_max).contains(&t) {
        return Err(Error::Parameter(format!("failure time {t} outside [0, {}]", timeline.t_max)));
    }
    if timeline.vehicle(scenario.failed_vehicle).is_none() {
        return Err(Error::Parameter(format!("no vehicle {} in plan", scenario.failed_vehicle)));
    }
    let mut inspected = BTreeSet::new();
    let mut vehicles = Vec::new();
    let mut commit_times = Vec::new();
    let mut consumed = Vec::new();
    for (tour, tl) in plan.tours.iter().zip(&timeline.vehicles) {
        debug_assert_eq!(tour.vehicle_id, tl.vehicle_id);
        inspected.extend(tl.inspected_by(t));
        if tl.vehicle_id == scenario.failed_vehicle {
            continue;
        }
        let budget = problem
            .vehicles
            .iter()
            .find(|v| v.vehicle_id == tl.vehicle_id)
            .map(|v| v.budget)
            .ok_or_else(|| Error::Validation(format!("tour for unknown vehicle {}", tl.vehicle_id)))?;
        let (start, when, used) = match tl.state_at(t) {
            VehicleState::Inspecting { segment_id, exit, end_t, end_battery, .. } => {
                inspected.insert(segment_id);
                (exit, end_t, end_battery)
            }
            VehicleState::Transit { position, battery } | VehicleState::Idle { position, battery } => {
                (position, t, battery)
            }
        };
        vehicles.push(VehicleSlot { vehicle_id: tl.vehicle_id, start, budget: (budget - used).max(0.0) });
        commit_times.push(when);
        consumed.push(used);
    }
    let outstanding = problem.segments.iter().filter(|s| !inspected.contains(&s.id)).cloned().collect();
    Ok(ResidualInstance {
        scenario,
        problem: Problem::new(problem.depot, outstanding, vehicles, problem.flight),
        commit_times,
        consumed,
        inspected: inspected.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanOutcome {
    pub success: bool,
    pub plan: Plan,
    /// cost-function value of `plan` under the survivors' remaining budgets
    pub cost: f64,
    pub violations: Vec<Violation>,
}

/// Re-plans the outstanding segments over the survivors. Success requires
/// at least one survivor and a plan within every survivor's remaining
/// budget; an unsuccessful re-plan is data, not an error.
pub fn replan(residual: &ResidualInstance, config: &SolverConfig) -> Result<ReplanOutcome> {
    let p = &residual.problem;
    if p.vehicles.is_empty() {
        return Ok(ReplanOutcome { success: false, plan: Plan { tours: Vec::new() }, cost: 0.0, violations: Vec::new() });
    }
    if p.segments.is_empty() {
        let plan = p.empty_plan();
        let violations = p.validate(&plan);
        let cost = plan_value(p, &plan, config.cost_function, config.k_c)?;
        return Ok(ReplanOutcome { success: violations.is_empty(), plan, cost, violations });
    }
    let r = solve_problem(p, config)?;
    Ok(ReplanOutcome { success: r.feasible, plan: r.best_plan, cost: r.best_cost, violations: r.violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowOptions {
    /// Grid step in seconds; 1 % of t_max when unset.
    pub dt: Option<f64>,
    /// Bisection stops once the bracket around t_star is this narrow (s).
    pub refine_tol: f64,
    /// Grid times evaluated together per batch in the backward sweep;
    /// 0 means one per worker thread. Does not affect the report.
    pub batch: usize,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self { dt: None, refine_tol: 0.1, batch: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub t: f64,
    pub vehicle: usize,
    pub success: bool,
    pub replan_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub t_star: f64,
    pub t_max: f64,
    pub window_percent: f64,
    /// Evaluated samples, ascending in t. The sweep runs backward from
    /// t_max and stops at the first failing grid time, so samples cover the
    /// all-success suffix, that failing time and the bisection probes.
    pub samples: Vec<WindowSample>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Solver seed for the re-plan of `vehicle` failing at `t`.
pub fn sample_seed(base: u64, t: f64, vehicle: usize) -> u64 {
    splitmix(splitmix(base ^ splitmix(t.to_bits())) ^ vehicle as u64)
}

fn failure_grid(timeline: &MissionTimeline, dt: f64) -> Vec<f64> {
    let mut grid = timeline.event_times();
    let steps = (timeline.t_max / dt).floor() as usize;
    grid.extend((0..=steps).map(|k| k as f64 * dt).filter(|&t| t <= timeline.t_max));
    grid.push(timeline.t_max);
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

struct Sweep<'a> {
    problem: &'a Problem,
    plan: &'a Plan,
    timeline: &'a MissionTimeline,
    config: &'a SolverConfig,
}

impl Sweep<'_> {
    fn sample(&self, t: f64, vehicle: usize) -> Result<WindowSample> {
        let scenario = FailureScenario { failed_vehicle: vehicle, t_fail: t };
        let residual = inject_failure(self.problem, self.plan, self.timeline, scenario)?;
        let cfg = SolverConfig { seed: sample_seed(self.config.seed, t, vehicle), ..self.config.clone() };
        let out = replan(&residual, &cfg)?;
        Ok(WindowSample { t, vehicle, success: out.success, replan_cost: out.cost })
    }

    fn samples_at(&self, times: &[f64]) -> Result<Vec<WindowSample>> {
        let pairs: Vec<(f64, usize)> = times
            .iter()
            .flat_map(|&t| self.timeline.vehicles.iter().map(move |v| (t, v.vehicle_id)))
            .collect();
        pairs.into_par_iter().map(|(t, v)| self.sample(t, v)).collect()
    }
}

/// Sweeps single-vehicle failures over the mission and reports the start
/// of the longest all-success suffix.
pub fn compute_window(
    problem: &Problem,
    plan: &Plan,
    config: &SolverConfig,
    options: &WindowOptions,
) -> Result<WindowReport> {
    config.validate()?;
    let timeline = build_timeline(problem, plan)?;
    let t_max = timeline.t_max;
    if t_max == 0.0 {
        return Ok(WindowReport { t_star: 0.0, t_max, window_percent: 100.0, samples: Vec::new() });
    }
    let dt = options.dt.unwrap_or(t_max / 100.0);
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    let grid = failure_grid(&timeline, dt);
    let sweep = Sweep { problem, plan, timeline: &timeline, config };

    let mut samples: Vec<WindowSample> = Vec::new();
    let mut failing: Option<usize> = None;
    let mut end = grid.len();
    'sweep: while end > 0 {
        let batch_len = match options.batch {
            0 => rayon::current_num_threads(),
            n => n,
        };
        let begin = end.saturating_sub(batch_len.max(1));
        let batch = sweep.samples_at(&grid[begin..end])?;
        // walk the batch from the latest time down
        for gi in (begin..end).rev() {
            let at_t: Vec<&WindowSample> = batch.iter().filter(|s| s.t == grid[gi]).collect();
            samples.extend(at_t.iter().map(|s| (*s).clone()));
            if at_t.iter().any(|s| !s.success) {
                failing = Some(gi);
                break 'sweep;
            }
        }
        end = begin;
    }

    let t_star = match failing {
        None => grid[0],
        Some(gi) if gi + 1 == grid.len() => t_max,
        Some(gi) => {
            let (mut lo, mut hi) = (grid[gi], grid[gi + 1]);
            while hi - lo > options.refine_tol {
                let mid = 0.5 * (lo + hi);
                let probe = sweep.samples_at(&[mid])?;
                let ok = probe.iter().all(|s| s.success);
                samples.extend(probe);
                if ok {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    samples.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.vehicle.cmp(&b.vehicle)));
    let window_percent = (100.0 * (t_max - t_star) / t_max).clamp(0.0, 100.0);
    Ok(WindowReport { t_star, t_max, window_percent, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostKind;
    use crate::model::{Direction, EnergyModel, Instance, Segment, Tour, Visit};

    fn model_instance() -> Instance {
        Instance {
            depot: Point::planar(0.0, 0.0),
            segments: vec![Segment::new(0, Point::planar(100.0, 0.0), Point::planar(200.0, 0.0))],
            n_vehicles: 1,
            budget_percent: 100.0,
            v_max: 5.0,
            v_insp: 1.0,
            energy: EnergyModel { rate_transit: 0.05, rate_insp: 0.02 },
        }
    }

    /// two vehicles: vehicle 0 flies segments 0 then 1 along +x, vehicle 1
    /// flies segment 2 along +y
    fn two_vehicle() -> (Instance, Plan) {
        let inst = Instance {
            segments: vec![
                Segment::new(0, Point::planar(100.0, 0.0), Point::planar(200.0, 0.0)),
                Segment::new(1, Point::planar(200.0, 0.0), Point::planar(300.0, 0.0)),
                Segment::new(2, Point::planar(0.0, 100.0), Point::planar(0.0, 250.0)),
            ],
            n_vehicles: 2,
            ..model_instance()
        };
        let d = inst.depot;
        let plan = Plan {
            tours: vec![
                Tour::new(0, d, d).with_visits(vec![Visit::new(0, Direction::Forward), Visit::new(1, Direction::Forward)]),
                Tour::new(1, d, d).with_visits(vec![Visit::new(2, Direction::Forward)]),
            ],
        };
        (inst, plan)
    }

    fn fast() -> SolverConfig {
        SolverConfig { restarts: 4, cost_function: CostKind::Combined, ..SolverConfig::default() }
    }

    #[test]
    fn single_segment_timeline() {
        let inst = model_instance();
        let d = inst.depot;
        let plan = Plan { tours: vec![Tour::new(0, d, d).with_visits(vec![Visit::new(0, Direction::Forward)])] };
        let tl = build_timeline(&inst.problem(), &plan).unwrap();
        let last = tl.vehicles[0].events.last().unwrap();
        assert_eq!(last.kind, EventKind::DepotArrival);
        assert!((last.t - 160.0).abs() < 1e-9);
        assert!((last.battery - 5.0).abs() < 1e-9);
        assert_eq!(tl.t_max, last.t);
        let kinds: Vec<EventKind> = tl.vehicles[0].events.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, [EventKind::TransitStart, EventKind::InspectStart, EventKind::InspectEnd, EventKind::DepotArrival]);
    }

    #[test]
    fn empty_tour_timeline() {
        let inst = Instance { n_vehicles: 2, ..model_instance() };
        let d = inst.depot;
        let plan = Plan {
            tours: vec![
                Tour::new(0, d, d).with_visits(vec![Visit::new(0, Direction::Forward)]),
                Tour::new(1, d, d),
            ],
        };
        let tl = build_timeline(&inst.problem(), &plan).unwrap();
        assert_eq!(tl.vehicles[1].events.len(), 1);
        assert_eq!(tl.vehicles[1].events[0].t, 0.0);
        assert_eq!(tl.vehicles[1].events[0].battery, 0.0);
        assert_eq!(tl.t_max, tl.vehicles.iter().map(|v| v.end_time()).fold(0.0, f64::max));
    }

    #[test]
    fn infeasible_plan_has_no_timeline() {
        let inst = model_instance();
        assert!(matches!(build_timeline(&inst.problem(), &inst.problem().empty_plan()), Err(Error::Parameter(_))));
    }

    #[test]
    fn failure_at_extremes() {
        let (inst, plan) = two_vehicle();
        let p = inst.problem();
        let tl = build_timeline(&p, &plan).unwrap();
        let at_end = inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 0, t_fail: tl.t_max }).unwrap();
        assert!(at_end.problem.segments.is_empty());
        let out = replan(&at_end, &fast()).unwrap();
        assert!(out.success);
        assert!(out.plan.tours.iter().all(|t| t.visits.is_empty()));

        let at_start = inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 1, t_fail: 0.0 }).unwrap();
        assert_eq!(at_start.problem.segments.len(), 3);
        assert_eq!(at_start.problem.vehicles.len(), 1);
        assert_eq!(at_start.problem.vehicles[0].start, inst.depot);
        assert_eq!(at_start.problem.vehicles[0].budget, inst.budget_percent);

        assert!(inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 0, t_fail: tl.t_max + 1.0 }).is_err());
        assert!(inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 7, t_fail: 1.0 }).is_err());
    }

    #[test]
    fn survivor_mid_inspection_commits_at_exit() {
        // vehicle 0: transit 20 s, seg 0 inspected 20..120, seg 1 120..220.
        // vehicle 1: transit 20 s, seg 2 inspected 20..170.
        // Failing vehicle 0 at t = 150: seg 0 done, seg 1 in progress (lost);
        // vehicle 1 is inspecting seg 2 and commits at (0, 250) at t = 170.
        let (inst, plan) = two_vehicle();
        let p = inst.problem();
        let tl = build_timeline(&p, &plan).unwrap();
        let r = inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 0, t_fail: 150.0 }).unwrap();
        assert_eq!(r.inspected, vec![0, 2]);
        assert_eq!(r.problem.segments.iter().map(|s| s.id).collect::<Vec<_>>(), vec![1]);
        assert_eq!(r.problem.vehicles[0].start, Point::planar(0.0, 250.0));
        assert!((r.commit_times[0] - 170.0).abs() < 1e-9);
        let used = 20.0 * 0.05 + 150.0 * 0.02;
        assert!((r.consumed[0] - used).abs() < 1e-9);
        assert!((r.problem.vehicles[0].budget - (100.0 - used)).abs() < 1e-9);
    }

    #[test]
    fn survivor_in_transit_commits_in_place() {
        let (inst, plan) = two_vehicle();
        let p = inst.problem();
        let tl = build_timeline(&p, &plan).unwrap();
        // vehicle 0 at t = 10 is halfway to (100, 0)
        let r = inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 1, t_fail: 10.0 }).unwrap();
        let s = r.problem.vehicles[0].start;
        assert!(s.distance(&Point::planar(50.0, 0.0)) < 1e-9);
        assert_eq!(r.commit_times[0], 10.0);
        assert!((r.consumed[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn conservation() {
        let (inst, plan) = two_vehicle();
        let p = inst.problem();
        let tl = build_timeline(&p, &plan).unwrap();
        let mut t = 0.0;
        while t <= tl.t_max {
            for v in 0..2 {
                let r = inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: v, t_fail: t }).unwrap();
                let mut all: Vec<u32> = r.inspected.clone();
                all.extend(r.problem.segments.iter().map(|s| s.id));
                all.sort();
                assert_eq!(all, vec![0, 1, 2], "t={t} v={v}");
            }
            t += 7.5;
        }
    }

    #[test]
    fn replan_fails_without_return_budget() {
        let (inst, plan) = two_vehicle();
        let p = inst.problem();
        let tl = build_timeline(&p, &plan).unwrap();
        let mut r = inject_failure(&p, &plan, &tl, FailureScenario { failed_vehicle: 0, t_fail: 150.0 }).unwrap();
        // returning from (0, 250) costs 50 s * 0.05 = 2.5 %
        r.problem.vehicles[0].budget = 2.0;
        r.problem = Problem::new(r.problem.depot, Vec::new(), r.problem.vehicles.clone(), r.problem.flight);
        let out = replan(&r, &fast()).unwrap();
        assert!(!out.success);
        assert!(matches!(out.violations[0], Violation::OverBudget { .. }));
    }

    #[test]
    fn unlimited_budget_window_is_full() {
        let (mut inst, plan) = two_vehicle();
        inst.budget_percent = 1e9;
        let rep = compute_window(&inst.problem(), &plan, &fast(), &WindowOptions::default()).unwrap();
        assert_eq!(rep.window_percent, 100.0);
        assert_eq!(rep.t_star, 0.0);
    }

    #[test]
    fn single_vehicle_window_is_zero() {
        let inst = Instance { budget_percent: 1e9, ..model_instance() };
        let d = inst.depot;
        let plan = Plan { tours: vec![Tour::new(0, d, d).with_visits(vec![Visit::new(0, Direction::Forward)])] };
        let rep = compute_window(&inst.problem(), &plan, &fast(), &WindowOptions::default()).unwrap();
        assert_eq!(rep.window_percent, 0.0);
        assert_eq!(rep.t_star, rep.t_max);
    }

    #[test]
    fn tight_budget_window_is_partial_and_deterministic() {
        let (mut inst, plan) = two_vehicle();
        let costs: Vec<f64> = inst.problem().tour_costs(&plan).unwrap().iter().map(|c| c.battery).collect();
        inst.budget_percent = costs.iter().copied().fold(0.0, f64::max) * 1.3;
        let opts = WindowOptions::default();
        let a = compute_window(&inst.problem(), &plan, &fast(), &opts).unwrap();
        let b = compute_window(&inst.problem(), &plan, &fast(), &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.window_percent > 0.0 && a.window_percent < 100.0, "{}", a.window_percent);
        assert!(a.samples.iter().filter(|s| s.t >= a.t_star).all(|s| s.success));
    }
}
