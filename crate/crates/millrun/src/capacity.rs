//! Plant capacity as a function of monthly startup count: nominal capacity,
//! the startup loss estimator, and the available-capacity report.

use serde::{Deserialize, Serialize};

use crate::demand::DemandSeries;
use crate::error::{Error, Result};
use crate::model::{LossFormula, PlantConfig};

/// Affine capacity line: available(n) = nominal - n * loss_per_start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    nominal_kg_month: f64,
    loss_per_start_kg: f64,
}

impl CapacityProfile {
    pub fn nominal_kg_month(&self) -> f64 {
        self.nominal_kg_month
    }

    pub fn loss_per_start_kg(&self) -> f64 {
        self.loss_per_start_kg
    }

    pub fn available(&self, startups: u32) -> f64 {
        self.nominal_kg_month - startups as f64 * self.loss_per_start_kg
    }
}

/// Monthly nominal capacity: productive hours times the summed net rates.
pub fn nominal_capacity(plant: &PlantConfig) -> f64 {
    plant.monthly_hours() * sum_net_rates(plant)
}

fn sum_net_rates(plant: &PlantConfig) -> f64 {
    plant.machines().iter().map(|m| m.net_rate()).sum()
}

fn sum_startups(plant: &PlantConfig) -> f64 {
    plant.machines().iter().map(|m| m.startup_hours()).sum()
}

/// Capacity lost to one startup under the configured formula reading.
///
/// `Printed` applies the 1/m factor once: (1/m) * (sum tau) * (sum s).
/// `Prose` multiplies the two plain averages: (sum tau / m) * (sum s / m),
/// which is exactly 1/m of the printed value. The hardcoded machine count
/// of the original estimator is generalized to however many machines the
/// plant actually has.
pub fn loss_per_start(plant: &PlantConfig) -> f64 {
    let m = plant.machine_count() as f64;
    let taus = sum_net_rates(plant);
    let starts = sum_startups(plant);
    match plant.loss_formula() {
        LossFormula::Printed => taus * starts / m,
        LossFormula::Prose => (taus / m) * (starts / m),
    }
}

/// Capacity lost to `n` startups; linear in n.
pub fn capacity_loss(plant: &PlantConfig, startups: u32) -> f64 {
    startups as f64 * loss_per_start(plant)
}

pub fn capacity_profile(plant: &PlantConfig) -> CapacityProfile {
    CapacityProfile {
        nominal_kg_month: nominal_capacity(plant),
        loss_per_start_kg: loss_per_start(plant),
    }
}

/// One row of the capacity report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub startups: u32,
    pub available_kg: f64,
    /// Largest monthly demand on record, when history was provided.
    pub required_max_kg: Option<f64>,
    /// Whether available capacity covers the largest monthly demand.
    pub sufficient: Option<bool>,
}

/// Available capacity for every startup count 0..=n_max, with a
/// sufficiency verdict against the demand history when one is given.
pub fn capacity_report(
    plant: &PlantConfig,
    demand: Option<&DemandSeries>,
    n_max: u32,
) -> Result<Vec<CapacityRow>> {
    let profile = capacity_profile(plant);
    let required = demand.map(|d| d.max_demand());
    if let Some(r) = required {
        if !r.is_finite() {
            return Err(Error::Capacity(
                "demand history has no finite maximum".into(),
            ));
        }
    }
    Ok((0..=n_max)
        .map(|n| {
            let available_kg = profile.available(n);
            CapacityRow {
                startups: n,
                available_kg,
                required_max_kg: required,
                sufficient: required.map(|r| available_kg >= r),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Machine;

    fn plant_of(machines: Vec<Machine>, monthly_hours: f64) -> PlantConfig {
        PlantConfig::new(machines, 8.0, 1000.0)
            .unwrap()
            .with_monthly_hours(monthly_hours)
            .unwrap()
    }

    fn four_identical() -> PlantConfig {
        let machines = (1..=4)
            .map(|id| Machine::new(id, 100.0, 1.0, 0.0, 12.0).unwrap())
            .collect();
        plant_of(machines, 176.0)
    }

    #[test]
    fn nominal_capacity_examples() {
        assert_eq!(nominal_capacity(&four_identical()), 70_400.0);

        let one = plant_of(vec![Machine::new(1, 1.0, 1.0, 0.0, 0.0).unwrap()], 1.0);
        assert_eq!(nominal_capacity(&one), 1.0);

        let mixed = plant_of(
            vec![
                Machine::new(1, 100.0, 0.9, 0.05, 12.0).unwrap(), // tau 85.5
                Machine::new(2, 90.0, 1.0, 0.0, 12.0).unwrap(),   // tau 90
                Machine::new(3, 100.0, 1.0, 0.0, 12.0).unwrap(),  // tau 100
                Machine::new(4, 120.0, 1.0, 0.0, 12.0).unwrap(),  // tau 120
            ],
            176.0,
        );
        assert_eq!(nominal_capacity(&mixed), 69_608.0);
    }

    #[test]
    fn loss_examples_and_prose_ratio() {
        let plant = four_identical();
        assert_eq!(capacity_loss(&plant, 0), 0.0);
        // (1/4) * (400 * 48) = 4800 per the printed formula.
        assert_eq!(capacity_loss(&plant, 1), 4_800.0);
        assert_eq!(capacity_loss(&plant, 2), 2.0 * capacity_loss(&plant, 1));

        // The prose reading gives the averages product: 100 * 12 = 1200,
        // exactly 1/m of the printed value.
        let prose = plant.clone().with_loss_formula(LossFormula::Prose);
        assert_eq!(capacity_loss(&prose, 1), 1_200.0);
        assert_eq!(
            capacity_loss(&prose, 1),
            capacity_loss(&plant, 1) / plant.machine_count() as f64
        );
    }

    #[test]
    fn available_identity_and_linearity() {
        let plant = four_identical();
        let profile = capacity_profile(&plant);
        for n in [0u32, 1, 3, 7, 10, 100] {
            assert_eq!(
                profile.available(n),
                nominal_capacity(&plant) - capacity_loss(&plant, n)
            );
        }
        assert_eq!(profile.available(0), nominal_capacity(&plant));
        // Additivity holds exactly on these integer-friendly constants.
        assert_eq!(
            capacity_loss(&plant, 10),
            capacity_loss(&plant, 3) + capacity_loss(&plant, 7)
        );
        // Affine: second difference is zero.
        let second = (profile.available(2) - profile.available(1))
            - (profile.available(1) - profile.available(0));
        assert!(second.abs() < 1e-9);
    }

    #[test]
    fn report_verdicts() {
        let plant = four_identical(); // nominal 70,400, loss 4,800/start
        let low = DemandSeries::from_demands(&[50_000.0, 60_000.0]).unwrap();
        let rows = capacity_report(&plant, Some(&low), 2).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].sufficient, Some(true));
        assert_eq!(rows[2].available_kg, 70_400.0 - 9_600.0);
        assert_eq!(rows[2].sufficient, Some(true));

        // A single machine overwhelmed even at zero startups.
        let small = plant_of(vec![Machine::new(1, 10.0, 1.0, 0.0, 1.0).unwrap()], 176.0);
        let heavy = DemandSeries::from_demands(&[5_000.0]).unwrap();
        let rows = capacity_report(&small, Some(&heavy), 0).unwrap();
        assert_eq!(rows[0].sufficient, Some(false));

        let no_demand = capacity_report(&plant, None, 1).unwrap();
        assert_eq!(no_demand[0].required_max_kg, None);
        assert_eq!(no_demand[0].sufficient, None);
    }

    #[test]
    fn hundred_startups_still_sufficient_on_ample_plant() {
        // A plant whose line stays above the demand ceiling even at n=100.
        let machines = (1..=4)
            .map(|id| Machine::new(id, 2000.0, 0.95, 0.03, 0.5).unwrap())
            .collect();
        let plant = plant_of(machines, 176.0);
        let demand = DemandSeries::from_demands(&[535_150.0, 435_536.0]).unwrap();
        let rows = capacity_report(&plant, Some(&demand), 100).unwrap();
        assert_eq!(rows[100].sufficient, Some(true));
    }
}
