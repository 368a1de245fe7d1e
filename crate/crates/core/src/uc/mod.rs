//! Unit commitment: per-unit schedule graphs, the graph-based problem spec
//! (one block per arc) and a three-binary baseline model.

mod build;
mod graph;

pub use build::{build_3bin, build_uc, fleet_graphs};
pub use graph::{build_dp_graph, decode_path, Arc, ArcKind, DpGraph, Node};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator data. Power in MW, costs in $.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub su_limit: f64,
    pub sd_limit: f64,
    pub min_up: u32,
    pub min_down: u32,
    /// $/MW² per period.
    pub cost_quad: f64,
    /// $/MW per period.
    pub cost_lin: f64,
    /// $ per period on.
    pub cost_fixed: f64,
    pub startup_cost: f64,
    /// Periods already spent on (> 0) or off (< 0) before period 1.
    pub initial_state: i32,
}

impl UnitSpec {
    pub fn check(&self) -> Result<()> {
        let ok = self.p_min > 0.0
            && self.p_min <= self.p_max
            && self.min_up >= 1
            && self.min_down >= 1
            && self.su_limit >= self.p_min
            && self.sd_limit >= self.p_min
            && self.ramp_up >= 0.0
            && self.ramp_down >= 0.0
            && self.cost_quad >= 0.0
            && [self.p_max, self.su_limit, self.sd_limit, self.ramp_up, self.ramp_down, self.cost_lin, self.cost_fixed, self.startup_cost]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidArgument(format!("unit data out of range: {self:?}")));
        }
        if self.initial_state == 0 {
            return Err(Error::InvalidArgument("initial_state must be nonzero (positive on, negative off)".into()));
        }
        Ok(())
    }

    /// A small unit used in examples and tests.
    pub fn example() -> Self {
        UnitSpec {
            p_min: 1.0,
            p_max: 2.0,
            ramp_up: 1.0,
            ramp_down: 1.0,
            su_limit: 2.0,
            sd_limit: 2.0,
            min_up: 1,
            min_down: 1,
            cost_quad: 1.0,
            cost_lin: 0.0,
            cost_fixed: 0.0,
            startup_cost: 0.0,
            initial_state: -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetClass {
    pub unit: UnitSpec,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub name: String,
    pub classes: Vec<FleetClass>,
    pub demand: Vec<f64>,
}

impl FleetSpec {
    pub fn periods(&self) -> u32 {
        self.demand.len() as u32
    }

    pub fn check(&self) -> Result<()> {
        if self.demand.is_empty() || self.demand.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("demand must be a nonempty finite vector".into()));
        }
        for c in &self.classes {
            if c.count == 0 {
                return Err(Error::InvalidArgument("class count must be at least 1".into()));
            }
            c.unit.check()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Shape of a random fleet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FleetParams {
    pub classes: u32,
    pub max_count: u32,
    pub periods: u32,
    pub seed: u64,
}

/// The ten-unit thermal system of Kazarlis, Bakirtzis and Petridis (1996):
/// `(p_max, p_min, a, b, c, min up/down, hot start cost, initial state)`.
const KAZARLIS: [(f64, f64, f64, f64, f64, u32, f64, i32); 10] = [
    (455.0, 150.0, 0.00048, 16.19, 1000.0, 8, 4500.0, 8),
    (455.0, 150.0, 0.00031, 17.26, 970.0, 8, 5000.0, 8),
    (130.0, 20.0, 0.002, 16.60, 700.0, 5, 550.0, -5),
    (130.0, 20.0, 0.00211, 16.50, 680.0, 5, 560.0, -5),
    (162.0, 25.0, 0.00398, 19.70, 450.0, 6, 900.0, -6),
    (80.0, 20.0, 0.00712, 22.26, 370.0, 3, 170.0, -3),
    (85.0, 25.0, 0.00079, 27.74, 480.0, 3, 260.0, -3),
    (55.0, 10.0, 0.00413, 25.92, 660.0, 1, 30.0, -1),
    (55.0, 10.0, 0.00222, 27.27, 665.0, 1, 30.0, -1),
    (55.0, 10.0, 0.00173, 27.79, 670.0, 1, 30.0, -1),
];

/// Hourly load of the same system, peak 1500 MW against 1662 MW installed.
const KAZARLIS_LOAD: [f64; 24] = [
    700.0, 750.0, 850.0, 950.0, 1000.0, 1100.0, 1150.0, 1200.0, 1300.0, 1400.0, 1450.0, 1500.0, 1400.0, 1300.0, 1200.0,
    1050.0, 1000.0, 1100.0, 1200.0, 1400.0, 1300.0, 1100.0, 900.0, 800.0,
];
const KAZARLIS_CAPACITY: f64 = 1662.0;

/// Random fleet built from distinct unit types of the ten-unit benchmark
/// system (linear costs perturbed by up to 5%), with the benchmark load
/// curve resampled to `periods` and scaled to the fleet's capacity with a
/// ±3% perturbation. Ramp and start-up/shut-down limits equal `p_max` and
/// initial states carry no residual obligation. Demand always lies between
/// 41% and 93% of capacity while `p_min/p_max ≤ 1/3` for every type, so
/// committing every unit in every period is feasible.
pub fn gen_fleet(p: &FleetParams) -> Result<FleetSpec> {
    if p.classes == 0 || p.max_count == 0 || p.periods == 0 {
        return Err(Error::InvalidArgument("fleet needs classes, counts and periods".into()));
    }
    if p.classes as usize > KAZARLIS.len() {
        return Err(Error::InvalidArgument(format!("at most {} unit classes", KAZARLIS.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(0x5543);
    let types = rand::seq::index::sample(&mut rng, KAZARLIS.len(), p.classes as usize).into_vec();
    let mut classes = Vec::new();
    for t in types {
        let (p_max, p_min, a, b, c, min_ud, hot, init) = KAZARLIS[t];
        let unit = UnitSpec {
            p_min,
            p_max,
            ramp_up: p_max,
            ramp_down: p_max,
            su_limit: p_max,
            sd_limit: p_max,
            min_up: min_ud,
            min_down: min_ud,
            cost_quad: a,
            cost_lin: (b * rng.gen_range(0.95..1.05) * 100.0).round() / 100.0,
            cost_fixed: c,
            startup_cost: hot,
            initial_state: init,
        };
        classes.push(FleetClass { unit, count: rng.gen_range(1..=p.max_count) });
    }
    let cap: f64 = classes.iter().map(|c| c.unit.p_max * c.count as f64).sum();
    let demand = (0..p.periods as usize)
        .map(|j| {
            let load = KAZARLIS_LOAD[j * KAZARLIS_LOAD.len() / p.periods as usize];
            (cap * load / KAZARLIS_CAPACITY * rng.gen_range(0.97..1.03)).round()
        })
        .collect();
    let fleet = FleetSpec { name: format!("uc_c{}_n{}_s{}", p.classes, p.periods, p.seed), classes, demand };
    fleet.check()?;
    Ok(fleet)
}
