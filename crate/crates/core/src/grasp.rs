//! GRASP solver: randomized greedy insertion followed by best-improvement
//! local search, repeated over independent restarts.
//!
//! Each restart draws from its own ChaCha stream keyed by `(seed, restart)`,
//! so results do not depend on how rayon schedules the restarts.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::{evaluate_with_budgets, CostKind, DEFAULT_K_C};
use crate::error::{Error, Result};
use crate::model::{Direction, Instance, Plan, Point, Problem, Tour, Violation, Visit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub restarts: usize,
    pub rcl_alpha: f64,
    pub seed: u64,
    pub max_local_search_passes: usize,
    pub cost_function: CostKind,
    pub k_c: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            rcl_alpha: 0.3,
            seed: 0,
            max_local_search_passes: 10_000,
            cost_function: CostKind::Combined,
            k_c: DEFAULT_K_C,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::Parameter("restarts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.rcl_alpha) {
            return Err(Error::Parameter(format!("rcl_alpha must be in [0, 1], got {}", self.rcl_alpha)));
        }
        if !(self.k_c > 0.0) {
            return Err(Error::Parameter(format!("k_c must be positive, got {}", self.k_c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_plan: Plan,
    pub best_cost: f64,
    pub per_restart_costs: Vec<f64>,
    pub wall_time: f64,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Cost-function value of `plan`, using each vehicle's own budget.
pub fn plan_value(problem: &Problem, plan: &Plan, kind: CostKind, k_c: f64) -> Result<f64> {
    let mut pairs = Vec::with_capacity(plan.tours.len());
    for tour in &plan.tours {
        let budget = problem
            .vehicles
            .iter()
            .find(|v| v.vehicle_id == tour.vehicle_id)
            .map(|v| v.budget)
            .ok_or_else(|| Error::Validation(format!("tour for unknown vehicle {}", tour.vehicle_id)))?;
        pairs.push((problem.tour_cost(tour)?.battery, budget));
    }
    Ok(evaluate_with_budgets(kind, k_c, pairs.into_iter()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Step {
    seg: usize,
    dir: Direction,
}

#[derive(Debug, Clone, Copy)]
struct SegData {
    a: Point,
    b: Point,
    insp: f64,
}

/// Index-based view of a problem with O(1) leg pricing.
struct Evaluator<'p> {
    problem: &'p Problem,
    segs: Vec<SegData>,
    kind: CostKind,
    k_c: f64,
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Relocate { from: usize, i: usize, to: usize, pos: usize, dir: Direction },
    Swap { ta: usize, i: usize, tb: usize, j: usize, dir_a: Direction, dir_b: Direction },
    /// Reverse steps `i..=j`, flipping directions. `i == j` is a plain flip.
    Reverse { t: usize, i: usize, j: usize },
}

#[derive(Debug, Clone)]
struct State {
    tours: Vec<Vec<Step>>,
    costs: Vec<f64>,
}

impl<'p> Evaluator<'p> {
    fn new(problem: &'p Problem, kind: CostKind, k_c: f64) -> Self {
        let segs = problem
            .segments
            .iter()
            .map(|s| SegData { a: s.a, b: s.b, insp: problem.flight.inspect_cost(s) })
            .collect();
        Self { problem, segs, kind, k_c }
    }

    fn n_tours(&self) -> usize {
        self.problem.vehicles.len()
    }

    #[inline]
    fn tr(&self, p: &Point, q: &Point) -> f64 {
        self.problem.flight.transit_cost(p, q)
    }

    #[inline]
    fn entry(&self, s: Step) -> Point {
        let d = &self.segs[s.seg];
        match s.dir {
            Direction::Forward => d.a,
            Direction::Reverse => d.b,
        }
    }

    #[inline]
    fn exit(&self, s: Step) -> Point {
        let d = &self.segs[s.seg];
        match s.dir {
            Direction::Forward => d.b,
            Direction::Reverse => d.a,
        }
    }

    /// Point the vehicle stands at just before position `p` of `steps`,
    /// optionally with index `skip` removed.
    #[inline]
    fn before(&self, t: usize, steps: &[Step], skip: Option<usize>, p: usize) -> Point {
        if p == 0 {
            return self.problem.vehicles[t].start;
        }
        let q = match skip {
            Some(s) if p - 1 >= s => p,
            _ => p - 1,
        };
        self.exit(steps[q])
    }

    /// Entry point of the step at position `p`, or the depot past the end.
    #[inline]
    fn at(&self, steps: &[Step], skip: Option<usize>, p: usize) -> Point {
        let len = steps.len() - usize::from(skip.is_some());
        if p >= len {
            return self.problem.depot;
        }
        let q = match skip {
            Some(s) if p >= s => p + 1,
            _ => p,
        };
        self.entry(steps[q])
    }

    fn tour_cost(&self, t: usize, steps: &[Step]) -> f64 {
        let mut at = self.problem.vehicles[t].start;
        let mut c = 0.0;
        for &s in steps {
            c += self.tr(&at, &self.entry(s));
            c += self.segs[s.seg].insp;
            at = self.exit(s);
        }
        c + self.tr(&at, &self.problem.depot)
    }

    fn value(&self, costs: &[f64]) -> f64 {
        let vehicles = &self.problem.vehicles;
        evaluate_with_budgets(self.kind, self.k_c, costs.iter().zip(vehicles).map(|(&c, v)| (c, v.budget)))
    }

    fn value_with(&self, costs: &[f64], a: (usize, f64), b: Option<(usize, f64)>) -> f64 {
        let vehicles = &self.problem.vehicles;
        let it = costs.iter().enumerate().zip(vehicles).map(|((i, &c), v)| {
            let c = if i == a.0 {
                a.1
            } else if let Some((bi, bc)) = b.filter(|&(bi, _)| bi == i) {
                debug_assert_eq!(bi, i);
                bc
            } else {
                c
            };
            (c, v.budget)
        });
        evaluate_with_budgets(self.kind, self.k_c, it)
    }

    fn insert_delta(&self, t: usize, steps: &[Step], skip: Option<usize>, p: usize, v: Step) -> f64 {
        let prev = self.before(t, steps, skip, p);
        let next = self.at(steps, skip, p);
        self.tr(&prev, &self.entry(v)) + self.segs[v.seg].insp + self.tr(&self.exit(v), &next) - self.tr(&prev, &next)
    }

    fn remove_delta(&self, t: usize, steps: &[Step], i: usize) -> f64 {
        let prev = self.before(t, steps, None, i);
        let next = self.at(steps, None, i + 1);
        let v = steps[i];
        self.tr(&prev, &next) - self.tr(&prev, &self.entry(v)) - self.segs[v.seg].insp - self.tr(&self.exit(v), &next)
    }

    /// Change in tour cost when the step at `i` is replaced by `w`.
    fn replace_delta(&self, t: usize, steps: &[Step], i: usize, w: Step) -> f64 {
        let prev = self.before(t, steps, None, i);
        let next = self.at(steps, None, i + 1);
        let v = steps[i];
        let old = self.tr(&prev, &self.entry(v)) + self.segs[v.seg].insp + self.tr(&self.exit(v), &next);
        let new = self.tr(&prev, &self.entry(w)) + self.segs[w.seg].insp + self.tr(&self.exit(w), &next);
        new - old
    }

    fn reverse_delta(&self, t: usize, steps: &[Step], i: usize, j: usize) -> f64 {
        let prev = self.before(t, steps, None, i);
        let next = self.at(steps, None, j + 1);
        let (si, sj) = (steps[i], steps[j]);
        self.tr(&prev, &self.exit(sj)) + self.tr(&self.entry(si), &next)
            - self.tr(&prev, &self.entry(si))
            - self.tr(&self.exit(sj), &next)
    }

    fn empty_state(&self) -> State {
        let tours = vec![Vec::new(); self.n_tours()];
        let costs = (0..self.n_tours()).map(|t| self.tour_cost(t, &[])).collect();
        State { tours, costs }
    }

    fn construct<R: Rng>(&self, alpha: f64, rng: &mut R) -> State {
        let mut state = self.empty_state();
        if self.n_tours() == 0 {
            return state;
        }
        // lowest segment id first, for deterministic tie-breaking
        let mut unvisited: Vec<usize> = (0..self.segs.len()).collect();
        unvisited.sort_by_key(|&i| self.problem.segments[i].id);

        let mut current = self.value(&state.costs);
        let mut cands: Vec<(f64, usize, usize, usize, Direction)> = Vec::new();
        while !unvisited.is_empty() {
            cands.clear();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (ui, &seg) in unvisited.iter().enumerate() {
                for (t, steps) in state.tours.iter().enumerate() {
                    for p in 0..=steps.len() {
                        for dir in Direction::BOTH {
                            let d = self.insert_delta(t, steps, None, p, Step { seg, dir });
                            let incr = self.value_with(&state.costs, (t, state.costs[t] + d), None) - current;
                            lo = lo.min(incr);
                            hi = hi.max(incr);
                            cands.push((incr, ui, t, p, dir));
                        }
                    }
                }
            }
            let threshold = lo + alpha * (hi - lo);
            let pick = if alpha == 0.0 {
                cands.iter().position(|c| c.0 <= lo).unwrap_or(0)
            } else {
                let rcl: Vec<usize> = (0..cands.len()).filter(|&k| cands[k].0 <= threshold).collect();
                rcl[rng.gen_range(0..rcl.len())]
            };
            let (_, ui, t, p, dir) = cands[pick];
            let seg = unvisited.remove(ui);
            state.tours[t].insert(p, Step { seg, dir });
            state.costs[t] = self.tour_cost(t, &state.tours[t]);
            current = self.value(&state.costs);
        }
        state
    }

    /// Best move over all neighborhoods, as `(plan value, move, new costs)`.
    fn best_move(&self, state: &State, current: f64) -> Option<(f64, Move, (usize, f64), Option<(usize, f64)>)> {
        let mut best: Option<(f64, Move, (usize, f64), Option<(usize, f64)>)> = None;
        let mut consider = |val: f64, mv: Move, a: (usize, f64), b: Option<(usize, f64)>| {
            if val < current && best.as_ref().is_none_or(|bm| val < bm.0) {
                best = Some((val, mv, a, b));
            }
        };
        let costs = &state.costs;
        let n_t = state.tours.len();

        // direction flips and intra-tour reversal
        for (t, steps) in state.tours.iter().enumerate() {
            for i in 0..steps.len() {
                for j in i..steps.len() {
                    let c = costs[t] + self.reverse_delta(t, steps, i, j);
                    consider(self.value_with(costs, (t, c), None), Move::Reverse { t, i, j }, (t, c), None);
                }
            }
        }

        // relocation, any tour, any position, either direction
        for (from, steps) in state.tours.iter().enumerate() {
            for i in 0..steps.len() {
                let rm = self.remove_delta(from, steps, i);
                let seg = steps[i].seg;
                for to in 0..n_t {
                    for dir in Direction::BOTH {
                        let v = Step { seg, dir };
                        if to == from {
                            for pos in 0..steps.len() {
                                if pos == i {
                                    continue;
                                }
                                let c = costs[from] + rm + self.insert_delta(from, steps, Some(i), pos, v);
                                let mv = Move::Relocate { from, i, to, pos, dir };
                                consider(self.value_with(costs, (from, c), None), mv, (from, c), None);
                            }
                        } else {
                            let dest = &state.tours[to];
                            let cf = costs[from] + rm;
                            for pos in 0..=dest.len() {
                                let ct = costs[to] + self.insert_delta(to, dest, None, pos, v);
                                let mv = Move::Relocate { from, i, to, pos, dir };
                                consider(self.value_with(costs, (from, cf), Some((to, ct))), mv, (from, cf), Some((to, ct)));
                            }
                        }
                    }
                }
            }
        }

        // inter-tour swaps, each side taking its cheaper orientation
        for ta in 0..n_t {
            for tb in ta + 1..n_t {
                let (sa, sb) = (&state.tours[ta], &state.tours[tb]);
                for i in 0..sa.len() {
                    for j in 0..sb.len() {
                        let (x, y) = (sa[i].seg, sb[j].seg);
                        let (da, dir_a) = Direction::BOTH
                            .iter()
                            .map(|&d| (self.replace_delta(ta, sa, i, Step { seg: y, dir: d }), d))
                            .fold((f64::INFINITY, Direction::Forward), |m, c| if c.0 < m.0 { c } else { m });
                        let (db, dir_b) = Direction::BOTH
                            .iter()
                            .map(|&d| (self.replace_delta(tb, sb, j, Step { seg: x, dir: d }), d))
                            .fold((f64::INFINITY, Direction::Forward), |m, c| if c.0 < m.0 { c } else { m });
                        let (ca, cb) = (costs[ta] + da, costs[tb] + db);
                        let mv = Move::Swap { ta, i, tb, j, dir_a, dir_b };
                        consider(self.value_with(costs, (ta, ca), Some((tb, cb))), mv, (ta, ca), Some((tb, cb)));
                    }
                }
            }
        }
        best
    }

    fn apply(&self, state: &mut State, mv: Move) -> Vec<usize> {
        match mv {
            Move::Relocate { from, i, to, pos, dir } => {
                let mut s = state.tours[from].remove(i);
                s.dir = dir;
                state.tours[to].insert(pos, s);
                if from == to {
                    vec![from]
                } else {
                    vec![from, to]
                }
            }
            Move::Swap { ta, i, tb, j, dir_a, dir_b } => {
                let x = state.tours[ta][i];
                let y = state.tours[tb][j];
                state.tours[ta][i] = Step { seg: y.seg, dir: dir_a };
                state.tours[tb][j] = Step { seg: x.seg, dir: dir_b };
                vec![ta, tb]
            }
            Move::Reverse { t, i, j } => {
                let steps = &mut state.tours[t];
                steps[i..=j].reverse();
                for s in &mut steps[i..=j] {
                    s.dir = s.dir.flipped();
                }
                vec![t]
            }
        }
    }

    fn local_search(&self, mut state: State, max_passes: usize) -> State {
        let mut current = self.value(&state.costs);
        for _ in 0..max_passes {
            let Some((_val, mv, a, b)) = self.best_move(&state, current) else {
                break;
            };
            let saved = state.clone();
            let touched = self.apply(&mut state, mv);
            for &t in &touched {
                state.costs[t] = self.tour_cost(t, &state.tours[t]);
            }
            debug_assert!(self.covers_once(&state));
            debug_assert!({
                let close = |x: f64, y: f64| (x - y).abs() <= 1e-7 * x.abs().max(1.0);
                close(state.costs[a.0], a.1) && b.is_none_or(|(bi, bc)| close(state.costs[bi], bc))
            });
            let new = self.value(&state.costs);
            if new < current {
                current = new;
            } else {
                // delta said improving, full recomputation disagrees: stop at the old plan
                state = saved;
                break;
            }
        }
        state
    }

    fn covers_once(&self, state: &State) -> bool {
        let mut seen = vec![0u8; self.segs.len()];
        for s in state.tours.iter().flatten() {
            seen[s.seg] += 1;
        }
        seen.iter().all(|&c| c == 1)
    }

    fn to_plan(&self, state: &State) -> Plan {
        let tours = state
            .tours
            .iter()
            .zip(&self.problem.vehicles)
            .map(|(steps, v)| {
                Tour::new(v.vehicle_id, v.start, self.problem.depot).with_visits(
                    steps.iter().map(|s| Visit::new(self.problem.segments[s.seg].id, s.dir)).collect(),
                )
            })
            .collect();
        Plan { tours }
    }

    fn from_plan(&self, plan: &Plan) -> Result<State> {
        let mut state = self.empty_state();
        for tour in &plan.tours {
            let t = self
                .problem
                .vehicles
                .iter()
                .position(|v| v.vehicle_id == tour.vehicle_id)
                .ok_or_else(|| Error::Validation(format!("tour for unknown vehicle {}", tour.vehicle_id)))?;
            for v in &tour.visits {
                let seg = self
                    .problem
                    .segment_index(v.segment_id)
                    .ok_or_else(|| Error::Validation(format!("unknown segment id {}", v.segment_id)))?;
                state.tours[t].push(Step { seg, dir: v.direction });
            }
        }
        if !self.covers_once(&state) {
            return Err(Error::Validation("plan must cover every segment exactly once".into()));
        }
        for t in 0..state.tours.len() {
            state.costs[t] = self.tour_cost(t, &state.tours[t]);
        }
        Ok(state)
    }
}

/// Randomized greedy insertion. Always returns a plan covering every
/// segment, which may exceed budgets.
pub fn construct<R: Rng>(problem: &Problem, config: &SolverConfig, rng: &mut R) -> Plan {
    let ev = Evaluator::new(problem, config.cost_function, config.k_c);
    ev.to_plan(&ev.construct(config.rcl_alpha, rng))
}

/// Best-improvement descent over flip, relocate, inter-tour swap and 2-opt
/// moves. The returned plan never costs more than the input.
pub fn local_search(problem: &Problem, plan: &Plan, config: &SolverConfig) -> Result<Plan> {
    let ev = Evaluator::new(problem, config.cost_function, config.k_c);
    let state = ev.from_plan(plan)?;
    Ok(ev.to_plan(&ev.local_search(state, config.max_local_search_passes)))
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

pub fn solve_problem(problem: &Problem, config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let started = Instant::now();
    let ev = Evaluator::new(problem, config.cost_function, config.k_c);
    let runs: Vec<(f64, Plan)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(config.seed, r);
            let state = ev.local_search(ev.construct(config.rcl_alpha, &mut rng), config.max_local_search_passes);
            let plan = ev.to_plan(&state);
            let value = plan_value(problem, &plan, config.cost_function, config.k_c)?;
            Ok((value, plan))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 < runs[best].0 {
            best = i;
        }
    }
    let per_restart_costs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (best_cost, best_plan) = runs.into_iter().nth(best).expect("restarts >= 1");
    let violations = problem.validate(&best_plan);
    Ok(SolveResult {
        feasible: violations.is_empty(),
        violations,
        best_plan,
        best_cost,
        per_restart_costs,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    instance.validate()?;
    solve_problem(&instance.problem(), config)
}
