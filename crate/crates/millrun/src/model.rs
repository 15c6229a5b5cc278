//! Plant data model: machines, customer orders, and plant-wide configuration.
//!
//! All internal times are hours as `f64`. Due dates are stored in working
//! days and converted once via [`Order::due_hours`]; nothing downstream
//! mixes units.

use serde::Serialize;

use crate::error::{Error, Result};

/// Monthly productive hours used for nominal capacity (22 days x 8 h).
pub const DEFAULT_MONTHLY_HOURS: f64 = 176.0;

/// Epsilon (hours) realizing the model's strict inequalities.
pub const DEFAULT_SLACK_EPSILON: f64 = 1e-6;

/// Which reading of the startup capacity-loss estimator to use.
///
/// The two readings disagree by a factor of the machine count; both are
/// kept so reports can surface the discrepancy instead of hiding it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFormula {
    /// Loss per startup = (1/m) * (sum of net rates) * (sum of startup times).
    #[default]
    Printed,
    /// Loss per startup = mean net rate * mean startup time.
    Prose,
}

impl std::str::FromStr for LossFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(LossFormula::Printed),
            "prose" => Ok(LossFormula::Prose),
            other => Err(Error::Config(format!(
                "loss_formula must be `printed` or `prose`, got `{other}`"
            ))),
        }
    }
}

/// A production machine: nominal rate, efficiency, scrap fraction, and the
/// startup (die swap + cleaning + conditioning) time paid per order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Machine {
    id: u32,
    rate_kg_h: f64,
    efficiency: f64,
    scrap: f64,
    startup_hours: f64,
}

impl Machine {
    pub fn new(
        id: u32,
        rate_kg_h: f64,
        efficiency: f64,
        scrap: f64,
        startup_hours: f64,
    ) -> Result<Self> {
        if !rate_kg_h.is_finite() || rate_kg_h <= 0.0 {
            return Err(Error::Model(format!(
                "machine {id}: nominal rate must be positive, got {rate_kg_h}"
            )));
        }
        if !efficiency.is_finite() || efficiency <= 0.0 || efficiency > 1.0 {
            return Err(Error::Model(format!(
                "machine {id}: efficiency must be in (0, 1], got {efficiency}"
            )));
        }
        if !scrap.is_finite() || !(0.0..1.0).contains(&scrap) {
            return Err(Error::Model(format!(
                "machine {id}: scrap fraction must be in [0, 1), got {scrap}"
            )));
        }
        if !startup_hours.is_finite() || startup_hours < 0.0 {
            return Err(Error::Model(format!(
                "machine {id}: startup hours must be non-negative, got {startup_hours}"
            )));
        }
        Ok(Machine {
            id,
            rate_kg_h,
            efficiency,
            scrap,
            startup_hours,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn rate_kg_h(&self) -> f64 {
        self.rate_kg_h
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn scrap(&self) -> f64 {
        self.scrap
    }

    pub fn startup_hours(&self) -> f64 {
        self.startup_hours
    }

    /// Effective output in kg/h: nominal rate x efficiency x (1 - scrap).
    /// Strictly positive for any constructible machine.
    pub fn net_rate(&self) -> f64 {
        self.rate_kg_h * self.efficiency * (1.0 - self.scrap)
    }
}

/// A customer order: quantity in kg and a due date in working days from the
/// start of the horizon. Ids are 1-based and define the processing sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Order {
    id: u32,
    quantity_kg: f64,
    due_days: f64,
}

impl Order {
    pub fn new(id: u32, quantity_kg: f64, due_days: f64) -> Result<Self> {
        if id == 0 {
            return Err(Error::Model("order ids are 1-based".into()));
        }
        if !quantity_kg.is_finite() || quantity_kg <= 0.0 {
            return Err(Error::Model(format!(
                "order {id}: quantity must be positive, got {quantity_kg}"
            )));
        }
        if !due_days.is_finite() || due_days <= 0.0 {
            return Err(Error::Model(format!(
                "order {id}: due date must be positive, got {due_days}"
            )));
        }
        Ok(Order {
            id,
            quantity_kg,
            due_days,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn quantity_kg(&self) -> f64 {
        self.quantity_kg
    }

    pub fn due_days(&self) -> f64 {
        self.due_days
    }

    /// Due date converted once to hours on the machine clock.
    pub fn due_hours(&self, hours_per_day: f64) -> f64 {
        self.due_days * hours_per_day
    }
}

/// Checks that order ids are unique and contiguous from 1, the convention
/// problem files must follow so the processing sequence is well defined.
pub fn validate_order_ids(orders: &[Order]) -> Result<()> {
    let mut seen = vec![false; orders.len()];
    for order in orders {
        let id = order.id() as usize;
        if id == 0 || id > orders.len() {
            return Err(Error::Model(format!(
                "order ids must be contiguous from 1 to {}, got {}",
                orders.len(),
                order.id()
            )));
        }
        if seen[id - 1] {
            return Err(Error::Model(format!("duplicate order id {}", order.id())));
        }
        seen[id - 1] = true;
    }
    Ok(())
}

/// Plant-wide configuration: the machine park, the working-day length, the
/// finished-goods warehouse capacity, and the tuning knobs read from the
/// plant config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantConfig {
    machines: Vec<Machine>,
    hours_per_day: f64,
    warehouse_capacity_kg: f64,
    pallet_kg: Option<f64>,
    monthly_hours: f64,
    slack_epsilon: f64,
    loss_formula: LossFormula,
}

impl PlantConfig {
    pub fn new(
        machines: Vec<Machine>,
        hours_per_day: f64,
        warehouse_capacity_kg: f64,
    ) -> Result<Self> {
        if machines.is_empty() {
            return Err(Error::Model("plant needs at least one machine".into()));
        }
        for (i, a) in machines.iter().enumerate() {
            if machines[..i].iter().any(|b| b.id() == a.id()) {
                return Err(Error::Model(format!("duplicate machine id {}", a.id())));
            }
        }
        if !hours_per_day.is_finite() || hours_per_day <= 0.0 {
            return Err(Error::Model(format!(
                "hours per day must be positive, got {hours_per_day}"
            )));
        }
        if !warehouse_capacity_kg.is_finite() || warehouse_capacity_kg <= 0.0 {
            return Err(Error::Model(format!(
                "warehouse capacity must be positive, got {warehouse_capacity_kg}"
            )));
        }
        Ok(PlantConfig {
            machines,
            hours_per_day,
            warehouse_capacity_kg,
            pallet_kg: None,
            monthly_hours: DEFAULT_MONTHLY_HOURS,
            slack_epsilon: DEFAULT_SLACK_EPSILON,
            loss_formula: LossFormula::default(),
        })
    }

    /// Builds a plant whose warehouse capacity is given in pallets; the
    /// kg-per-pallet conversion is plant data and must be supplied.
    pub fn with_pallet_capacity(
        machines: Vec<Machine>,
        hours_per_day: f64,
        pallets: f64,
        pallet_kg: f64,
    ) -> Result<Self> {
        if !pallets.is_finite() || pallets <= 0.0 {
            return Err(Error::Model(format!(
                "pallet count must be positive, got {pallets}"
            )));
        }
        let plant = PlantConfig::new(machines, hours_per_day, pallets * pallet_kg)?;
        plant.with_pallet_kg(pallet_kg)
    }

    pub fn with_monthly_hours(mut self, monthly_hours: f64) -> Result<Self> {
        if !monthly_hours.is_finite() || monthly_hours <= 0.0 {
            return Err(Error::Model(format!(
                "monthly hours must be positive, got {monthly_hours}"
            )));
        }
        self.monthly_hours = monthly_hours;
        Ok(self)
    }

    pub fn with_pallet_kg(mut self, pallet_kg: f64) -> Result<Self> {
        if !pallet_kg.is_finite() || pallet_kg <= 0.0 {
            return Err(Error::Model(format!(
                "pallet weight must be positive, got {pallet_kg}"
            )));
        }
        self.pallet_kg = Some(pallet_kg);
        Ok(self)
    }

    pub fn with_slack_epsilon(mut self, epsilon_hours: f64) -> Result<Self> {
        if !epsilon_hours.is_finite() || epsilon_hours < 0.0 {
            return Err(Error::Model(format!(
                "slack epsilon must be non-negative, got {epsilon_hours}"
            )));
        }
        self.slack_epsilon = epsilon_hours;
        Ok(self)
    }

    pub fn with_loss_formula(mut self, formula: LossFormula) -> Self {
        self.loss_formula = formula;
        self
    }

    /// Same plant with a different warehouse capacity, used by scenario sweeps.
    pub fn with_warehouse_kg(&self, warehouse_capacity_kg: f64) -> Result<Self> {
        if !warehouse_capacity_kg.is_finite() || warehouse_capacity_kg <= 0.0 {
            return Err(Error::Model(format!(
                "warehouse capacity must be positive, got {warehouse_capacity_kg}"
            )));
        }
        let mut plant = self.clone();
        plant.warehouse_capacity_kg = warehouse_capacity_kg;
        Ok(plant)
    }

    pub fn machines(&self) -> &[Machine] {
        &self.machines
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn hours_per_day(&self) -> f64 {
        self.hours_per_day
    }

    pub fn warehouse_capacity_kg(&self) -> f64 {
        self.warehouse_capacity_kg
    }

    pub fn pallet_kg(&self) -> Option<f64> {
        self.pallet_kg
    }

    pub fn monthly_hours(&self) -> f64 {
        self.monthly_hours
    }

    pub fn slack_epsilon(&self) -> f64 {
        self.slack_epsilon
    }

    pub fn loss_formula(&self) -> LossFormula {
        self.loss_formula
    }
}

/// Hours to run `order` on `machine`: startup plus quantity over net rate.
/// Strictly greater than the startup time alone.
pub fn processing_time(order: &Order, machine: &Machine) -> f64 {
    machine.startup_hours() + order.quantity_kg() / machine.net_rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn machine(rate: f64, e: f64, m: f64, s: f64) -> Machine {
        Machine::new(1, rate, e, m, s).unwrap()
    }

    #[test]
    fn net_rate_identity_factors() {
        assert_eq!(machine(100.0, 1.0, 0.0, 0.0).net_rate(), 100.0);
    }

    #[test]
    fn net_rate_typical() {
        let tau = machine(100.0, 0.9, 0.05, 12.0).net_rate();
        assert!((tau - 85.5).abs() < 1e-12);
    }

    #[test]
    fn net_rate_half_half() {
        assert!((machine(50.0, 0.5, 0.5, 0.0).net_rate() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn processing_time_examples() {
        let m = machine(100.0, 0.9, 0.05, 12.0);
        let order = Order::new(1, 855.0, 3.0).unwrap();
        assert!((processing_time(&order, &m) - 22.0).abs() < 1e-12);

        let fast = machine(100.0, 1.0, 0.0, 0.0);
        let small = Order::new(1, 100.0, 3.0).unwrap();
        assert!((processing_time(&small, &fast) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn processing_time_near_zero_quantity_approaches_startup() {
        // Q = 0 is rejected at construction; the smallest admissible Q shows
        // the limit s while staying strictly above it.
        let m = machine(100.0, 0.9, 0.05, 12.0);
        let tiny = Order::new(1, 1e-9, 1.0).unwrap();
        let t = processing_time(&tiny, &m);
        assert!(t > 12.0);
        assert!((t - 12.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_machines_rejected() {
        assert!(Machine::new(1, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Machine::new(1, -5.0, 1.0, 0.0, 0.0).is_err());
        assert!(Machine::new(1, 100.0, 0.0, 0.0, 0.0).is_err());
        assert!(Machine::new(1, 100.0, 1.1, 0.0, 0.0).is_err());
        assert!(Machine::new(1, 100.0, 1.0, 1.0, 0.0).is_err());
        assert!(Machine::new(1, 100.0, 1.0, -0.1, 0.0).is_err());
        assert!(Machine::new(1, 100.0, 1.0, 0.0, -1.0).is_err());
        assert!(Machine::new(1, 100.0, 1.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn invalid_orders_rejected() {
        assert!(Order::new(0, 100.0, 1.0).is_err());
        assert!(Order::new(1, 0.0, 1.0).is_err());
        assert!(Order::new(1, -1.0, 1.0).is_err());
        assert!(Order::new(1, 100.0, 0.0).is_err());
        assert!(Order::new(1, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn order_ids_must_be_contiguous() {
        let o = |id| Order::new(id, 10.0, 1.0).unwrap();
        assert!(validate_order_ids(&[o(1), o(2), o(3)]).is_ok());
        assert!(validate_order_ids(&[o(2), o(1)]).is_ok());
        assert!(validate_order_ids(&[o(1), o(3)]).is_err());
        assert!(validate_order_ids(&[o(1), o(1)]).is_err());
        assert!(validate_order_ids(&[]).is_ok());
    }

    #[test]
    fn plant_rejects_bad_inputs() {
        let m = machine(100.0, 1.0, 0.0, 0.0);
        assert!(PlantConfig::new(vec![], 8.0, 1000.0).is_err());
        assert!(PlantConfig::new(vec![m, m], 8.0, 1000.0).is_err());
        assert!(PlantConfig::new(vec![m], 0.0, 1000.0).is_err());
        assert!(PlantConfig::new(vec![m], 8.0, 0.0).is_err());
        assert!(PlantConfig::new(vec![m], 8.0, 1000.0)
            .unwrap()
            .with_monthly_hours(0.0)
            .is_err());
    }

    #[test]
    fn pallet_capacity_converts_to_kg() {
        let m = machine(100.0, 1.0, 0.0, 0.0);
        let plant = PlantConfig::with_pallet_capacity(vec![m], 8.0, 84.0, 1000.0).unwrap();
        assert_eq!(plant.warehouse_capacity_kg(), 84_000.0);
        assert_eq!(plant.pallet_kg(), Some(1000.0));
        assert_eq!(plant.monthly_hours(), 176.0);
    }

    proptest! {
        #[test]
        fn net_rate_monotone(
            rate in 1.0..1000.0f64,
            e in 0.01..1.0f64,
            scrap in 0.0..0.99f64,
            bump in 0.001..0.5f64,
        ) {
            let base = Machine::new(1, rate, e, scrap, 0.0).unwrap().net_rate();
            let faster = Machine::new(1, rate * (1.0 + bump), e, scrap, 0.0).unwrap().net_rate();
            prop_assert!(faster > base);
            if e * (1.0 + bump) <= 1.0 {
                let better = Machine::new(1, rate, e * (1.0 + bump), scrap, 0.0).unwrap().net_rate();
                prop_assert!(better > base);
            }
            if scrap + bump < 1.0 {
                let wasteful = Machine::new(1, rate, e, scrap + bump, 0.0).unwrap().net_rate();
                prop_assert!(wasteful < base);
            }
        }

        #[test]
        fn processing_time_monotone_in_quantity(
            q in 1.0..1e6f64,
            extra in 0.001..1e5f64,
            rate in 1.0..1000.0f64,
            s in 0.0..24.0f64,
        ) {
            let m = Machine::new(1, rate, 0.9, 0.05, s).unwrap();
            let a = processing_time(&Order::new(1, q, 1.0).unwrap(), &m);
            let b = processing_time(&Order::new(1, q + extra, 1.0).unwrap(), &m);
            prop_assert!(b > a);
        }
    }
}
