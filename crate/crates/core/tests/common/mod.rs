#![allow(dead_code)]

use ptlplan::model::{EnergyCalibration, EnergyModel};
use ptlplan::{Instance, Point, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random segments scattered in a box around the depot.
pub fn random_tiny_instance(seed: u64, max_seg: usize, max_vehicles: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_seg = rng.gen_range(1..=max_seg);
    let n_vehicles = rng.gen_range(1..=max_vehicles);
    let segments = (0..n_seg)
        .map(|i| {
            let a = Point::planar(rng.gen_range(-150.0..150.0), rng.gen_range(-150.0..150.0));
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let len = rng.gen_range(20.0..80.0);
            let b = Point::planar(a.x + len * ang.cos(), a.y + len * ang.sin());
            Segment::new(i as u32 * 3 + 1, a, b)
        })
        .collect();
    Instance {
        depot: Point::planar(0.0, 0.0),
        segments,
        n_vehicles,
        budget_percent: rng.gen_range(40.0..120.0),
        v_max: 5.0,
        v_insp: 1.0,
        energy: EnergyModel::calibrated(&EnergyCalibration::default(), 5.0, 1.0).unwrap(),
    }
}
