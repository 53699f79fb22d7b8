//! Exhaustive solver for tiny problems, used as ground truth.
//!
//! Every segment-to-vehicle assignment is visited. All three objectives are
//! non-decreasing in every tour cost, so for a fixed assignment the best
//! plan pairs each vehicle with its cheapest ordering and orientation of
//! the assigned segments; those are found by enumerating all `k! * 2^k`
//! tours of each subset once.

use serde::{Deserialize, Serialize};

use crate::costs::{evaluate_with_budgets, CostKind};
use crate::error::{Error, Result};
use crate::grasp::plan_value;
use crate::model::{Direction, Plan, Point, Problem, Tour, Visit};

pub const MAX_SEGMENTS: usize = 8;
pub const MAX_VEHICLES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimal_plan: Plan,
    pub optimal_cost: f64,
    /// Number of complete plans covered by the enumeration.
    pub enumerated_count: u64,
}

struct TourTable {
    /// per subset mask: (cost, visits), cheapest then lexicographically smallest
    best: Vec<(f64, Vec<Visit>)>,
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Cheapest tour from `start` through each subset of `segs`, back to the depot.
fn tour_table(problem: &Problem, order: &[usize], start: Point) -> TourTable {
    let n = order.len();
    let fm = &problem.flight;
    let mut best = vec![(f64::INFINITY, Vec::new()); 1 << n];
    best[0] = (fm.transit_cost(&start, &problem.depot), Vec::new());

    // DFS over sequences in lexicographic (segment id, direction) order so
    // the first minimum found for a mask is the lexicographically smallest.
    struct Frame<'a> {
        problem: &'a Problem,
        order: &'a [usize],
        best: &'a mut Vec<(f64, Vec<Visit>)>,
        path: Vec<Visit>,
    }
    fn dfs(f: &mut Frame<'_>, mask: usize, at: Point, prefix: f64) {
        let fm = &f.problem.flight;
        for (bit, &si) in f.order.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                continue;
            }
            let seg = &f.problem.segments[si];
            for dir in Direction::BOTH {
                let (entry, exit) = seg.endpoints(dir);
                let c = prefix + fm.transit_cost(&at, &entry) + fm.inspect_cost(seg);
                let m = mask | (1 << bit);
                f.path.push(Visit::new(seg.id, dir));
                let total = c + fm.transit_cost(&exit, &f.problem.depot);
                if total < f.best[m].0 {
                    f.best[m] = (total, f.path.clone());
                }
                dfs(f, m, exit, c);
                f.path.pop();
            }
        }
    }
    let mut frame = Frame { problem, order, best: &mut best, path: Vec::with_capacity(n) };
    dfs(&mut frame, 0, start, 0.0);
    TourTable { best }
}

pub fn exact_solve(problem: &Problem, kind: CostKind, k_c: f64) -> Result<OracleResult> {
    let n = problem.segments.len();
    let m = problem.vehicles.len();
    if n > MAX_SEGMENTS || m > MAX_VEHICLES {
        return Err(Error::Refused(format!(
            "oracle handles at most {MAX_SEGMENTS} segments and {MAX_VEHICLES} vehicles (got {n} and {m})"
        )));
    }
    if m == 0 {
        return Err(Error::Parameter("oracle needs at least one vehicle".into()));
    }
    // bit i of a subset mask refers to the i-th segment in id order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| problem.segments[i].id);

    let mut tables: Vec<(Point, TourTable)> = Vec::new();
    let table_of: Vec<usize> = problem
        .vehicles
        .iter()
        .map(|v| match tables.iter().position(|(p, _)| *p == v.start) {
            Some(i) => i,
            None => {
                tables.push((v.start, tour_table(problem, &order, v.start)));
                tables.len() - 1
            }
        })
        .collect();

    let tour_count: Vec<u64> = (0..=n).map(|k| factorial(k) << k).collect();
    let mut assignment = vec![0usize; n];
    let mut count = 0u64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let encode = |masks: &[usize]| -> Vec<Vec<Visit>> {
        masks.iter().enumerate().map(|(v, &mk)| tables[table_of[v]].1.best[mk].1.clone()).collect()
    };
    loop {
        let mut masks = vec![0usize; m];
        for (bit, &v) in assignment.iter().enumerate() {
            masks[v] |= 1 << bit;
        }
        count += masks.iter().map(|mk| tour_count[mk.count_ones() as usize]).product::<u64>();
        let value = evaluate_with_budgets(
            kind,
            k_c,
            masks.iter().enumerate().map(|(v, &mk)| (tables[table_of[v]].1.best[mk].0, problem.vehicles[v].budget)),
        );
        let better = match &best {
            None => true,
            Some((bv, bm)) => value < *bv || (value == *bv && encode(&masks) < encode(bm)),
        };
        if better {
            best = Some((value, masks));
        }
        // next assignment in base-m counting
        let mut i = 0;
        while i < n {
            assignment[i] += 1;
            if assignment[i] < m {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }

    let (_, masks) = best.expect("at least one assignment");
    let tours = encode(&masks)
        .into_iter()
        .zip(&problem.vehicles)
        .map(|(visits, v)| Tour::new(v.vehicle_id, v.start, problem.depot).with_visits(visits))
        .collect();
    let optimal_plan = Plan { tours };
    let optimal_cost = plan_value(problem, &optimal_plan, kind, k_c)?;
    Ok(OracleResult { optimal_plan, optimal_cost, enumerated_count: count })
}
