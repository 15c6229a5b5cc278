//! Scenario analysis: monthly demand segmented into seeded synthetic
//! orders, solved across alternative warehouse capacities, plus the
//! critical-demand bisection and its service-risk probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::demand::{tail_probability, NormalFit};
use crate::error::{Error, Result};
use crate::model::{Order, PlantConfig};
use crate::solver::{
    solve_exhaustive, solve_greedy, solve_local_search, SolveMethod, DEFAULT_LOCAL_BUDGET,
    DEFAULT_ORACLE_LIMIT,
};

/// Bisection bracket and tolerance for the critical-demand search.
pub const CRITICAL_BRACKET_LO_KG: f64 = 1e4;
pub const CRITICAL_BRACKET_HI_KG: f64 = 1e7;
pub const CRITICAL_TOLERANCE_KG: f64 = 1_000.0;

/// How monthly demand is split into order quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeDistribution {
    /// Every order gets demand / count.
    EqualSplit,
    /// Random proportions from seeded Gamma(2) weights, 1 kg floor.
    SeededDirichlet,
}

/// Synthetic order generator configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderGen {
    /// Orders per month.
    pub count: usize,
    pub size_dist: SizeDistribution,
    /// Working days in the month; due dates are distinct days drawn
    /// uniformly from 1..=working_days.
    #[serde(default = "default_working_days")]
    pub working_days: u32,
}

fn default_working_days() -> u32 {
    22
}

/// Warehouse capacity, in pallets (converted via the plant's pallet weight)
/// or directly in kg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityOption {
    Pallets(f64),
    Kg(f64),
}

impl CapacityOption {
    pub fn to_kg(&self, pallet_kg: Option<f64>) -> Result<f64> {
        match *self {
            CapacityOption::Kg(kg) => Ok(kg),
            CapacityOption::Pallets(p) => {
                let per = pallet_kg.ok_or_else(|| {
                    Error::Scenario(
                        "warehouse option given in pallets but the plant config has no pallet_kg"
                            .into(),
                    )
                })?;
                Ok(p * per)
            }
        }
    }
}

/// A full sweep specification: the monthly demands to replay, the
/// warehouse capacities to compare, and the order generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub monthly_demands: Vec<f64>,
    pub warehouse_options: Vec<CapacityOption>,
    pub order_gen: OrderGen,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.monthly_demands.is_empty() {
            return Err(Error::Scenario("scenario needs at least one month".into()));
        }
        if self
            .monthly_demands
            .iter()
            .any(|d| !d.is_finite() || *d <= 0.0)
        {
            return Err(Error::Scenario(
                "monthly demands must be finite and positive".into(),
            ));
        }
        if self.warehouse_options.is_empty() {
            return Err(Error::Scenario(
                "scenario needs at least one warehouse option".into(),
            ));
        }
        if self.order_gen.count == 0 {
            return Err(Error::Scenario("order count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Splits one month's demand into `count` orders with distinct due days.
/// Quantities are rounded to whole kg with the largest order absorbing the
/// residual, so the total stays within half a kilogram of the demand.
/// Identical seeds reproduce identical orders.
pub fn segment_demand(month_demand_kg: f64, gen: &OrderGen, seed: u64) -> Result<Vec<Order>> {
    if !month_demand_kg.is_finite() || month_demand_kg <= 0.0 {
        return Err(Error::Scenario(format!(
            "month demand must be positive, got {month_demand_kg}"
        )));
    }
    let count = gen.count;
    if count == 0 {
        return Err(Error::Scenario("order count must be at least 1".into()));
    }
    if count as u32 > gen.working_days {
        return Err(Error::Scenario(format!(
            "cannot spread {count} orders over {} working days with distinct due dates",
            gen.working_days
        )));
    }
    if month_demand_kg <= count as f64 {
        return Err(Error::Scenario(format!(
            "demand {month_demand_kg} kg is too small to split into {count} orders"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut quantities: Vec<f64> = match gen.size_dist {
        SizeDistribution::EqualSplit => vec![month_demand_kg / count as f64; count],
        SizeDistribution::SeededDirichlet => {
            // Normalized Gamma(2) draws give a Dirichlet(2,...,2) split;
            // a 1 kg baseline per order keeps every quantity positive.
            let gamma =
                Gamma::new(2.0, 1.0).map_err(|e| Error::Scenario(format!("gamma sampler: {e}")))?;
            let raw: Vec<f64> = (0..count).map(|_| gamma.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let spread = month_demand_kg - count as f64;
            raw.iter().map(|w| 1.0 + w / total * spread).collect()
        }
    };

    // Round to whole kg, then restore exact conservation on the largest
    // order (guarding its positivity).
    for q in quantities.iter_mut() {
        *q = q.round().max(1.0);
    }
    let largest = (0..count)
        .max_by(|&a, &b| quantities[a].partial_cmp(&quantities[b]).unwrap())
        .unwrap();
    let others: f64 = quantities
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != largest)
        .map(|(_, q)| q)
        .sum();
    if month_demand_kg - others >= 1.0 {
        quantities[largest] = month_demand_kg - others;
    }

    // Distinct due days via a partial Fisher-Yates over 1..=working_days,
    // sorted so order ids follow the due-date sequence.
    let mut days: Vec<u32> = (1..=gen.working_days).collect();
    for i in 0..count {
        let pick = rng.random_range(i..days.len());
        days.swap(i, pick);
    }
    let mut due: Vec<u32> = days[..count].to_vec();
    due.sort_unstable();

    quantities
        .iter()
        .zip(&due)
        .enumerate()
        .map(|(i, (&q, &day))| Order::new(i as u32 + 1, q, day as f64))
        .collect()
}

/// One (month, warehouse capacity) cell of the sweep. Failed cells carry
/// the error text instead of results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub month: usize,
    pub a_kg: f64,
    pub demand_kg: f64,
    pub unserved: Option<usize>,
    pub z_kg: Option<f64>,
    pub error: Option<String>,
}

fn solve_with(
    method: SolveMethod,
    orders: &[Order],
    plant: &PlantConfig,
    seed: u64,
) -> Result<crate::solver::SolveResult> {
    match method {
        SolveMethod::Oracle => solve_exhaustive(orders, plant, DEFAULT_ORACLE_LIMIT),
        SolveMethod::Greedy => solve_greedy(orders, plant),
        SolveMethod::LocalSearch => solve_local_search(orders, plant, seed, DEFAULT_LOCAL_BUDGET),
    }
}

/// Runs the solver for every (month, warehouse capacity) pair. Cells are
/// ordered month-major, capacities in the order given. Every month's orders
/// come from the one scenario seed, so a cell is a pure function of its
/// (demand, capacity) pair and duplicate month rows give identical results.
pub fn warehouse_sweep(
    spec: &ScenarioSpec,
    plant: &PlantConfig,
    method: SolveMethod,
) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let capacities: Vec<f64> = spec
        .warehouse_options
        .iter()
        .map(|o| o.to_kg(plant.pallet_kg()))
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(spec.monthly_demands.len() * capacities.len());
    for (mi, &demand) in spec.monthly_demands.iter().enumerate() {
        let seed = spec.seed;
        let orders = segment_demand(demand, &spec.order_gen, seed);
        for &a_kg in &capacities {
            let cell = match &orders {
                Err(e) => SweepCell {
                    month: mi + 1,
                    a_kg,
                    demand_kg: demand,
                    unserved: None,
                    z_kg: None,
                    error: Some(e.to_string()),
                },
                Ok(orders) => match plant
                    .with_warehouse_kg(a_kg)
                    .and_then(|p| solve_with(method, orders, &p, seed))
                {
                    Ok(result) => SweepCell {
                        month: mi + 1,
                        a_kg,
                        demand_kg: demand,
                        unserved: Some(result.unserved_count()),
                        z_kg: Some(result.objective_kg()),
                        error: None,
                    },
                    Err(e) => SweepCell {
                        month: mi + 1,
                        a_kg,
                        demand_kg: demand,
                        unserved: None,
                        z_kg: None,
                        error: Some(e.to_string()),
                    },
                },
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}

/// Smallest monthly demand (within 1,000 kg) at which the solver leaves at
/// least one order unserved under warehouse capacity `a_kg`. Bisection over
/// [10^4, 10^7] kg; the same seed regenerates the same unit split at every
/// probe, so only the scale varies.
pub fn critical_demand(
    plant: &PlantConfig,
    a_kg: f64,
    gen: &OrderGen,
    seed: u64,
    method: SolveMethod,
) -> Result<f64> {
    let plant = plant.with_warehouse_kg(a_kg)?;
    let shortfall = |demand: f64| -> Result<bool> {
        let orders = segment_demand(demand, gen, seed)?;
        let result = solve_with(method, &orders, &plant, seed)?;
        Ok(result.unserved_count() >= 1)
    };

    let (mut lo, mut hi) = (CRITICAL_BRACKET_LO_KG, CRITICAL_BRACKET_HI_KG);
    if shortfall(lo)? || !shortfall(hi)? {
        return Err(Error::NoCriticalPoint { lo, hi });
    }
    while hi - lo > CRITICAL_TOLERANCE_KG {
        let mid = 0.5 * (lo + hi);
        if shortfall(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Probability that monthly demand exceeds the critical level: the tail of
/// the fitted normal at the critical demand.
pub fn service_risk(fit: &NormalFit, critical_kg: f64) -> f64 {
    tail_probability(fit, critical_kg)
}
