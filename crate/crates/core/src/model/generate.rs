//! Synthetic power-line networks.
//!
//! A handful of nearly straight pylon chains leave a substation, some of
//! them spawning side branches. The whole network is generated first from
//! the seed alone and only then clipped to the `d_max` radius, so a larger
//! radius always yields a superset of the segments (with the same ids).

use std::collections::VecDeque;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnergyCalibration, EnergyModel, Instance, Point, Segment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Number of lines leaving the substation.
    pub corridors: usize,
    /// Mean pylon spacing in meters.
    pub span_mean: f64,
    /// Relative spacing jitter, spans are drawn from `span_mean * (1 ± span_jitter)`.
    pub span_jitter: f64,
    /// Maximum heading change per span, radians.
    pub heading_jitter: f64,
    /// Probability that a corridor pylon starts a side branch.
    pub branch_probability: f64,
    /// Distance of the first pylon from the substation.
    pub gantry_offset: f64,
    /// Chains stop growing past this radius; must exceed any `d_max` used.
    pub max_radius: f64,
    pub max_segments: usize,
    pub pylon_height: f64,
    pub n_vehicles: usize,
    pub budget_percent: f64,
    pub v_max: f64,
    pub v_insp: f64,
    pub energy: EnergyCalibration,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            corridors: 4,
            span_mean: 120.0,
            span_jitter: 0.15,
            heading_jitter: 0.03,
            branch_probability: 0.06,
            gantry_offset: 20.0,
            max_radius: 5000.0,
            max_segments: 4000,
            pylon_height: 0.0,
            n_vehicles: 4,
            budget_percent: 100.0,
            v_max: 5.0,
            v_insp: 1.0,
            energy: EnergyCalibration::default(),
        }
    }
}

struct Chain {
    origin: Point,
    heading: f64,
    is_branch: bool,
}

/// Deterministically generates an instance from `seed`, keeping only the
/// segments whose endpoints both lie within `d_max` of the depot.
pub fn generate_instance(seed: u64, d_max: f64, params: &GeneratorParams) -> Result<Instance> {
    if !(d_max > 0.0) {
        return Err(Error::Parameter(format!("d_max must be positive, got {d_max}")));
    }
    if params.corridors == 0 || !(params.span_mean > 0.0) || !(params.max_radius > 0.0) {
        return Err(Error::Parameter("corridors, span_mean and max_radius must be positive".into()));
    }
    let depot = Point::new(0.0, 0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let base = rng.gen::<f64>() * TAU;
    let sector = TAU / params.corridors as f64;
    let mut queue: VecDeque<Chain> = (0..params.corridors)
        .map(|i| {
            let heading = base + sector * i as f64 + (rng.gen::<f64>() - 0.5) * 0.4 * sector;
            let origin = Point::new(
                depot.x + params.gantry_offset * heading.cos(),
                depot.y + params.gantry_offset * heading.sin(),
                params.pylon_height,
            );
            Chain { origin, heading, is_branch: false }
        })
        .collect();

    let mut network = Vec::new();
    while let Some(chain) = queue.pop_front() {
        let mut at = chain.origin;
        let mut heading = chain.heading;
        let mut pylons = 0usize;
        while network.len() < params.max_segments {
            let span = params.span_mean * (1.0 + params.span_jitter * (2.0 * rng.gen::<f64>() - 1.0));
            heading += params.heading_jitter * (2.0 * rng.gen::<f64>() - 1.0);
            let next = Point::new(at.x + span * heading.cos(), at.y + span * heading.sin(), params.pylon_height);
            if next.distance(&depot) > params.max_radius {
                break;
            }
            network.push(Segment::new(network.len() as u32, at, next));
            pylons += 1;
            let branch_roll = rng.gen::<f64>();
            let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let turn = 0.5 + 0.7 * rng.gen::<f64>();
            if !chain.is_branch && pylons >= 2 && branch_roll < params.branch_probability {
                queue.push_back(Chain { origin: next, heading: heading + side * turn, is_branch: true });
            }
            at = next;
        }
    }

    let segments: Vec<Segment> = network
        .into_iter()
        .filter(|s| s.a.distance(&depot) <= d_max && s.b.distance(&depot) <= d_max)
        .collect();
    if segments.is_empty() {
        return Err(Error::Generation(format!("no segment lies within d_max = {d_max} m")));
    }
    let instance = Instance {
        depot,
        segments,
        n_vehicles: params.n_vehicles,
        budget_percent: params.budget_percent,
        v_max: params.v_max,
        v_insp: params.v_insp,
        energy: EnergyModel::calibrated(&params.energy, params.v_max, params.v_insp)?,
    };
    instance.validate()?;
    Ok(instance)
}
