//! Exact evaluator for the order-to-machine assignment model: processing
//! times, machine-clock completion times, due-date slacks, warehouse
//! interactions and occupancy, the objective, and a feasibility verdict.
//!
//! The processing sequence is the slice order of `orders` (ascending id in
//! problem files); sequencing is not a decision variable. Completion times
//! follow the machine-local recurrence F[i][j] = F[i-1][j] + T[i][j], so
//! machines run in parallel and column j depends only on column j of the
//! assignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Machine, Order, PlantConfig};

/// The binary assignment matrix x: x[i][j] = 1 iff sequence position i runs
/// on machine j. Row sums above one are representable; they are reported as
/// constraint violations by the evaluator, not rejected here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAssignment", into = "RawAssignment")]
pub struct Assignment {
    machines: usize,
    x: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct RawAssignment {
    machines: usize,
    x: Vec<Vec<u8>>,
}

impl From<Assignment> for RawAssignment {
    fn from(a: Assignment) -> Self {
        RawAssignment {
            machines: a.machines,
            x: a.x,
        }
    }
}

impl TryFrom<RawAssignment> for Assignment {
    type Error = Error;

    fn try_from(raw: RawAssignment) -> Result<Self> {
        let a = Assignment {
            machines: raw.machines,
            x: raw.x,
        };
        a.check_shape()?;
        Ok(a)
    }
}

impl Assignment {
    pub fn empty(orders: usize, machines: usize) -> Self {
        Assignment {
            machines,
            x: vec![vec![0; machines]; orders],
        }
    }

    pub fn from_matrix(x: Vec<Vec<u8>>, machines: usize) -> Result<Self> {
        let a = Assignment { machines, x };
        a.check_shape()?;
        Ok(a)
    }

    /// Builds a one-entry-per-row matrix from per-order machine choices.
    pub fn from_choices(choices: &[Option<usize>], machines: usize) -> Result<Self> {
        let mut a = Assignment::empty(choices.len(), machines);
        for (i, choice) in choices.iter().enumerate() {
            if let Some(j) = *choice {
                if j >= machines {
                    return Err(Error::Schedule(format!(
                        "machine index {j} out of range for {machines} machines"
                    )));
                }
                a.x[i][j] = 1;
            }
        }
        Ok(a)
    }

    fn check_shape(&self) -> Result<()> {
        for row in &self.x {
            if row.len() != self.machines {
                return Err(Error::Schedule(format!(
                    "assignment rows must have {} entries, got {}",
                    self.machines,
                    row.len()
                )));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Schedule("assignment entries must be 0 or 1".into()));
            }
        }
        Ok(())
    }

    pub fn orders(&self) -> usize {
        self.x.len()
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn get(&self, order: usize, machine: usize) -> u8 {
        self.x[order][machine]
    }

    pub fn set(&mut self, order: usize, machine: usize, assigned: bool) {
        self.x[order][machine] = assigned as u8;
    }

    pub fn row_sum(&self, order: usize) -> u32 {
        self.x[order].iter().map(|&v| v as u32).sum()
    }

    /// First machine the row assigns, if any.
    pub fn assigned_machine(&self, order: usize) -> Option<usize> {
        self.x[order].iter().position(|&v| v == 1)
    }

    pub fn matrix(&self) -> &[Vec<u8>] {
        &self.x
    }
}

/// Constraint families of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Each order runs on at most one machine.
    Eq1,
    /// Positive slack: every assigned order finishes before its due time.
    Eq5,
    /// Warehouse occupancy never exceeds capacity.
    Eq7,
}

/// One violated constraint, pointing at the offending 1-based sequence
/// position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub order_index: usize,
}

/// Feasibility verdict with the full violation list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Verdict {
            feasible: violations.is_empty(),
            violations,
        }
    }
}

/// Comparison knobs for the model's strict inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Margin (hours) realizing strict `<` comparisons.
    pub epsilon_hours: f64,
    /// Whether two orders finishing at the same instant count as resident
    /// together. Counting the tie is the conservative reading: it can only
    /// raise occupancy, never hide a warehouse breach.
    pub tie_is_interaction: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            epsilon_hours: crate::model::DEFAULT_SLACK_EPSILON,
            tie_is_interaction: true,
        }
    }
}

/// Full evaluation of one assignment, every intermediate exposed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvaluation {
    /// T: per (order, machine) processing hours, zero where unassigned.
    pub processing_matrix: Vec<Vec<f64>>,
    /// Tp: per-order processing hours (row sums of T).
    pub processing_hours: Vec<f64>,
    /// F: machine-clock finish times.
    pub finish_matrix: Vec<Vec<f64>>,
    /// L: per-order finish time; zero for unassigned orders.
    pub finish_hours: Vec<f64>,
    /// H: per-order slack, due time in hours minus finish time.
    pub slack_hours: Vec<f64>,
    /// Lambda: symmetric warehouse-interaction matrix, zero diagonal.
    pub interaction: Vec<Vec<u8>>,
    /// O: kg resident in the warehouse while each order is stored.
    pub occupancy_kg: Vec<f64>,
    /// Z: total kg produced.
    pub objective_kg: f64,
    pub verdict: Verdict,
}

fn check_dims(orders: &[Order], machines: &[Machine], x: &Assignment) -> Result<()> {
    if x.orders() != orders.len() || x.machines() != machines.len() {
        return Err(Error::Schedule(format!(
            "assignment is {}x{} but the problem has {} orders and {} machines",
            x.orders(),
            x.machines(),
            orders.len(),
            machines.len()
        )));
    }
    Ok(())
}

/// Processing-time matrix T[i][j] = x[i][j] (s_j + Q_i / tau_j) and its row
/// sums Tp. Rows with sum above one still evaluate; Eq 1 is a verdict.
pub fn processing_matrix(
    orders: &[Order],
    machines: &[Machine],
    x: &Assignment,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_dims(orders, machines, x)?;
    let t: Vec<Vec<f64>> = orders
        .iter()
        .enumerate()
        .map(|(i, order)| {
            machines
                .iter()
                .enumerate()
                .map(|(j, machine)| {
                    x.get(i, j) as f64
                        * (machine.startup_hours() + order.quantity_kg() / machine.net_rate())
                })
                .collect()
        })
        .collect();
    let tp = t.iter().map(|row| row.iter().sum()).collect();
    Ok((t, tp))
}

/// Machine-clock finish times F[i][j] = F[i-1][j] + T[i][j] and per-order
/// finish L[i] = sum_j x[i][j] F[i][j]. Unassigned orders get L = 0.
pub fn completion_times(
    orders: &[Order],
    machines: &[Machine],
    x: &Assignment,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let (t, _) = processing_matrix(orders, machines, x)?;
    let n = orders.len();
    let m = machines.len();
    let mut f = vec![vec![0.0; m]; n];
    for j in 0..m {
        let mut clock = 0.0;
        for (i, f_row) in f.iter_mut().enumerate() {
            clock += t[i][j];
            f_row[j] = clock;
        }
    }
    let l = (0..n)
        .map(|i| (0..m).map(|j| x.get(i, j) as f64 * f[i][j]).sum())
        .collect();
    Ok((f, l))
}

/// Slacks H[i] = h E_i - L[i] plus the 1-based positions of assigned orders
/// whose slack falls below epsilon.
pub fn slacks(
    orders: &[Order],
    finish_hours: &[f64],
    assigned: &[bool],
    hours_per_day: f64,
    epsilon: f64,
) -> (Vec<f64>, Vec<usize>) {
    let h: Vec<f64> = orders
        .iter()
        .zip(finish_hours)
        .map(|(order, l)| order.due_hours(hours_per_day) - l)
        .collect();
    let violations = h
        .iter()
        .enumerate()
        .filter(|&(i, slack)| assigned[i] && *slack < epsilon)
        .map(|(i, _)| i + 1)
        .collect();
    (h, violations)
}

/// Warehouse interaction: orders i and k interact when their residency
/// intervals [L, due) overlap. Strict comparisons carry the epsilon margin;
/// simultaneous arrivals follow `tie_is_interaction`. Unassigned orders
/// never interact.
pub fn interaction_matrix(
    finish_hours: &[f64],
    due_hours: &[f64],
    assigned: &[bool],
    epsilon: f64,
    tie_is_interaction: bool,
) -> Vec<Vec<u8>> {
    let n = finish_hours.len();
    let mut lambda = vec![vec![0u8; n]; n];
    for i in 0..n {
        if !assigned[i] {
            continue;
        }
        for k in (i + 1)..n {
            if !assigned[k] {
                continue;
            }
            let (li, lk) = (finish_hours[i], finish_hours[k]);
            let interacts = if (li - lk).abs() <= epsilon {
                tie_is_interaction
            } else if li < lk {
                lk < due_hours[i] - epsilon
            } else {
                li < due_hours[k] - epsilon
            };
            if interacts {
                lambda[i][k] = 1;
                lambda[k][i] = 1;
            }
        }
    }
    lambda
}

/// Occupancy O[i] = (sum_j x[i][j]) (Q_i + sum_k lambda[i][k] Q_k) and the
/// 1-based positions exceeding the warehouse capacity.
pub fn occupancy(
    orders: &[Order],
    x: &Assignment,
    lambda: &[Vec<u8>],
    warehouse_capacity_kg: f64,
) -> (Vec<f64>, Vec<usize>) {
    let o: Vec<f64> = orders
        .iter()
        .enumerate()
        .map(|(i, order)| {
            let resident: f64 = orders
                .iter()
                .enumerate()
                .map(|(k, other)| lambda[i][k] as f64 * other.quantity_kg())
                .sum();
            x.row_sum(i) as f64 * (resident + order.quantity_kg())
        })
        .collect();
    let violations = o
        .iter()
        .enumerate()
        .filter(|&(_, v)| *v > warehouse_capacity_kg)
        .map(|(i, _)| i + 1)
        .collect();
    (o, violations)
}

/// Objective Z: total kg over assigned orders.
pub fn objective(orders: &[Order], x: &Assignment) -> f64 {
    orders
        .iter()
        .enumerate()
        .map(|(i, order)| order.quantity_kg() * x.row_sum(i) as f64)
        .sum()
}

/// Evaluates an assignment against the full model. Feasible iff every row
/// sums to at most one (Eq 1), every assigned order has positive slack
/// (Eq 5), and no occupancy exceeds the warehouse capacity (Eq 7).
pub fn evaluate(
    orders: &[Order],
    plant: &PlantConfig,
    x: &Assignment,
) -> Result<ScheduleEvaluation> {
    evaluate_with(
        orders,
        plant,
        x,
        &EvalOptions {
            epsilon_hours: plant.slack_epsilon(),
            ..EvalOptions::default()
        },
    )
}

pub fn evaluate_with(
    orders: &[Order],
    plant: &PlantConfig,
    x: &Assignment,
    opts: &EvalOptions,
) -> Result<ScheduleEvaluation> {
    let machines = plant.machines();
    check_dims(orders, machines, x)?;
    let n = orders.len();

    let mut violations = Vec::new();
    for i in 0..n {
        if x.row_sum(i) > 1 {
            violations.push(Violation {
                constraint: Constraint::Eq1,
                order_index: i + 1,
            });
        }
    }

    let (t, tp) = processing_matrix(orders, machines, x)?;
    let (f, l) = completion_times(orders, machines, x)?;
    let assigned: Vec<bool> = (0..n).map(|i| x.row_sum(i) > 0).collect();

    let (h, slack_violations) = slacks(
        orders,
        &l,
        &assigned,
        plant.hours_per_day(),
        opts.epsilon_hours,
    );
    violations.extend(slack_violations.into_iter().map(|order_index| Violation {
        constraint: Constraint::Eq5,
        order_index,
    }));

    let due_hours: Vec<f64> = orders
        .iter()
        .map(|o| o.due_hours(plant.hours_per_day()))
        .collect();
    let lambda = interaction_matrix(
        &l,
        &due_hours,
        &assigned,
        opts.epsilon_hours,
        opts.tie_is_interaction,
    );
    let (o, occupancy_violations) = occupancy(orders, x, &lambda, plant.warehouse_capacity_kg());
    violations.extend(
        occupancy_violations
            .into_iter()
            .map(|order_index| Violation {
                constraint: Constraint::Eq7,
                order_index,
            }),
    );

    Ok(ScheduleEvaluation {
        processing_matrix: t,
        processing_hours: tp,
        finish_matrix: f,
        finish_hours: l,
        slack_hours: h,
        interaction: lambda,
        occupancy_kg: o,
        objective_kg: objective(orders, x),
        verdict: Verdict::from_violations(violations),
    })
}

/// Allocation-free evaluator for the inner loops of the solvers: same
/// semantics as [`evaluate`], reduced to the feasibility verdict, the
/// objective, and the unserved count, with early exit on any violation.
pub(crate) struct LeanEvaluator {
    /// proc[i][j] = s_j + Q_i / tau_j.
    proc: Vec<Vec<f64>>,
    quantities: Vec<f64>,
    due_hours: Vec<f64>,
    capacity_kg: f64,
    epsilon: f64,
    tie_is_interaction: bool,
    clocks: Vec<f64>,
    finish: Vec<f64>,
}

pub(crate) struct LeanOutcome {
    pub feasible: bool,
    pub objective_kg: f64,
    pub unserved: u32,
}

impl LeanEvaluator {
    pub(crate) fn new(orders: &[Order], plant: &PlantConfig) -> Self {
        let proc = orders
            .iter()
            .map(|order| {
                plant
                    .machines()
                    .iter()
                    .map(|m| m.startup_hours() + order.quantity_kg() / m.net_rate())
                    .collect()
            })
            .collect();
        LeanEvaluator {
            proc,
            quantities: orders.iter().map(|o| o.quantity_kg()).collect(),
            due_hours: orders
                .iter()
                .map(|o| o.due_hours(plant.hours_per_day()))
                .collect(),
            capacity_kg: plant.warehouse_capacity_kg(),
            epsilon: plant.slack_epsilon(),
            tie_is_interaction: true,
            clocks: vec![0.0; plant.machine_count()],
            finish: vec![0.0; orders.len()],
        }
    }

    /// Finish time of sequence position `i` as of the last `evaluate` call.
    /// The finish pass always runs to completion, so this is valid for
    /// feasible and infeasible candidates alike.
    pub(crate) fn finish_of(&self, i: usize) -> f64 {
        self.finish[i]
    }

    pub(crate) fn quantity_of(&self, i: usize) -> f64 {
        self.quantities[i]
    }

    pub(crate) fn evaluate(&mut self, choices: &[Option<usize>]) -> LeanOutcome {
        let n = choices.len();
        self.clocks.iter_mut().for_each(|c| *c = 0.0);

        let mut objective_kg = 0.0;
        let mut unserved = 0u32;
        let mut feasible = true;
        for i in 0..n {
            match choices[i] {
                Some(j) => {
                    self.clocks[j] += self.proc[i][j];
                    self.finish[i] = self.clocks[j];
                    objective_kg += self.quantities[i];
                    if self.due_hours[i] - self.finish[i] < self.epsilon {
                        feasible = false;
                    }
                }
                None => {
                    self.finish[i] = 0.0;
                    unserved += 1;
                }
            }
        }
        if feasible {
            'outer: for i in 0..n {
                if choices[i].is_none() {
                    continue;
                }
                let mut load = self.quantities[i];
                if load > self.capacity_kg {
                    feasible = false;
                    break 'outer;
                }
                for k in 0..n {
                    if k == i || choices[k].is_none() {
                        continue;
                    }
                    let (li, lk) = (self.finish[i], self.finish[k]);
                    let interacts = if (li - lk).abs() <= self.epsilon {
                        self.tie_is_interaction
                    } else if li < lk {
                        lk < self.due_hours[i] - self.epsilon
                    } else {
                        li < self.due_hours[k] - self.epsilon
                    };
                    if interacts {
                        load += self.quantities[k];
                        if load > self.capacity_kg {
                            feasible = false;
                            break 'outer;
                        }
                    }
                }
            }
        }

        LeanOutcome {
            feasible,
            objective_kg,
            unserved,
        }
    }
}
