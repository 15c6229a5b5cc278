//! File formats: CSV readers for plant/order/demand data, the flat
//! key-value plant config, and the CSV/JSON report writers. Every writer
//! goes through an atomic temp-file-plus-rename so a crash never leaves a
//! partial output behind, and every emitted format re-parses through the
//! readers in this module.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacity::CapacityRow;
use crate::demand::{DemandPeriod, DemandSeries};
use crate::error::{Error, Result};
use crate::forecast::{BacktestResult, GridSearch};
use crate::model::{LossFormula, Machine, Order, PlantConfig};
use crate::scenario::{ScenarioSpec, SweepCell};
use crate::solver::SolveResult;

/// Demand history plus the period labels it came with, so reports can echo
/// them.
#[derive(Debug, Clone)]
pub struct DemandTable {
    pub labels: Vec<String>,
    pub series: DemandSeries,
}

#[derive(Deserialize)]
struct MachineRow {
    id: u32,
    t_kg_h: f64,
    e: f64,
    m: f64,
    s_h: f64,
}

/// Reads `id,t_kg_h,e,m,s_h` machine rows.
pub fn read_machines_csv(path: &Path) -> Result<Vec<Machine>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut machines = Vec::new();
    for row in reader.deserialize() {
        let row: MachineRow = row.map_err(|e| csv_err(path, e))?;
        machines.push(Machine::new(row.id, row.t_kg_h, row.e, row.m, row.s_h)?);
    }
    if machines.is_empty() {
        return Err(Error::parse(path, "no machine rows"));
    }
    Ok(machines)
}

#[derive(Deserialize)]
struct OrderRow {
    id: u32,
    q_kg: f64,
    due_days: f64,
}

/// Reads `id,q_kg,due_days` order rows, sorted by id with ids required to
/// be contiguous from 1.
pub fn read_orders_csv(path: &Path) -> Result<Vec<Order>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut orders = Vec::new();
    for row in reader.deserialize() {
        let row: OrderRow = row.map_err(|e| csv_err(path, e))?;
        orders.push(Order::new(row.id, row.q_kg, row.due_days)?);
    }
    crate::model::validate_order_ids(&orders)?;
    orders.sort_by_key(|o| o.id());
    Ok(orders)
}

#[derive(Deserialize)]
struct DemandRow {
    period: String,
    demand_kg: f64,
    #[serde(default)]
    sales_kg: Option<f64>,
}

/// Reads `period,demand_kg,sales_kg` history; the sales column may be
/// empty or missing entirely.
pub fn read_demand_csv(path: &Path) -> Result<DemandTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut labels = Vec::new();
    let mut periods = Vec::new();
    for row in reader.deserialize() {
        let row: DemandRow = row.map_err(|e| csv_err(path, e))?;
        labels.push(row.period);
        periods.push(DemandPeriod {
            demand_kg: row.demand_kg,
            sales_kg: row.sales_kg,
        });
    }
    Ok(DemandTable {
        labels,
        series: DemandSeries::new(periods)?,
    })
}

/// Parses the flat `key = value` plant config and combines it with the
/// machine park. Keys: h_per_day (required), A_kg or A_pallets (one
/// required; pallets need pallet_kg), pallet_kg, monthly_hours,
/// slack_epsilon, loss_formula.
pub fn read_plant_cfg(path: &Path, machines: Vec<Machine>) -> Result<PlantConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut h_per_day = None;
    let mut monthly_hours = None;
    let mut a_kg = None;
    let mut a_pallets = None;
    let mut pallet_kg = None;
    let mut slack_epsilon = None;
    let mut loss_formula = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::parse(path, format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let num = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| {
                Error::parse(
                    path,
                    format!("line {}: `{key}` needs a number, got `{value}`", lineno + 1),
                )
            })
        };
        match key {
            "h_per_day" => h_per_day = Some(num()?),
            "monthly_hours" => monthly_hours = Some(num()?),
            "A_kg" => a_kg = Some(num()?),
            "A_pallets" => a_pallets = Some(num()?),
            "pallet_kg" => pallet_kg = Some(num()?),
            "slack_epsilon" => slack_epsilon = Some(num()?),
            "loss_formula" => loss_formula = Some(value.parse::<LossFormula>()?),
            other => {
                return Err(Error::parse(
                    path,
                    format!("line {}: unknown key `{other}`", lineno + 1),
                ))
            }
        }
    }

    let h = h_per_day.ok_or_else(|| Error::parse(path, "missing required key `h_per_day`"))?;
    let mut plant = match (a_kg, a_pallets) {
        (Some(kg), None) => PlantConfig::new(machines, h, kg)?,
        (None, Some(pallets)) => {
            let per = pallet_kg.ok_or_else(|| {
                Error::parse(path, "`A_pallets` requires `pallet_kg` for the conversion")
            })?;
            PlantConfig::with_pallet_capacity(machines, h, pallets, per)?
        }
        (Some(_), Some(_)) => {
            return Err(Error::parse(
                path,
                "give either `A_kg` or `A_pallets`, not both",
            ))
        }
        (None, None) => {
            return Err(Error::parse(
                path,
                "missing warehouse capacity (`A_kg` or `A_pallets`)",
            ))
        }
    };
    if a_kg.is_some() {
        if let Some(per) = pallet_kg {
            plant = plant.with_pallet_kg(per)?;
        }
    }
    if let Some(v) = monthly_hours {
        plant = plant.with_monthly_hours(v)?;
    }
    if let Some(v) = slack_epsilon {
        plant = plant.with_slack_epsilon(v)?;
    }
    if let Some(v) = loss_formula {
        plant = plant.with_loss_formula(v);
    }
    Ok(plant)
}

/// Writes bytes through a temp file in the target directory plus an atomic
/// rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e.to_string()))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::parse(path, e.to_string())
}

/// Demand analytics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub d_ins: Option<f64>,
    pub mu: f64,
    pub sigma: f64,
    pub cv: f64,
    pub ad_stat: Option<f64>,
    pub ad_p: Option<f64>,
}

pub fn write_analysis_json(path: &Path, report: &AnalysisReport) -> Result<()> {
    write_json(path, report)
}

pub fn read_analysis_json(path: &Path) -> Result<AnalysisReport> {
    read_json(path)
}

/// One line of the forecast ranking table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReportRow {
    pub model: String,
    pub parameters: std::collections::BTreeMap<String, f64>,
    pub mape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub models: Vec<ForecastReportRow>,
}

fn report_row(result: &BacktestResult) -> ForecastReportRow {
    use crate::forecast::ForecastModelSpec as Spec;
    let mut parameters = std::collections::BTreeMap::new();
    match result.spec {
        Spec::Mean | Spec::LinearRegression => {}
        Spec::MovingAverage { window } => {
            parameters.insert("window".into(), window as f64);
        }
        Spec::Ses { alpha } => {
            parameters.insert("alpha".into(), alpha);
        }
        Spec::Holt { alpha, gamma } => {
            parameters.insert("alpha".into(), alpha);
            parameters.insert("gamma".into(), gamma);
        }
        Spec::Winters {
            alpha,
            gamma,
            delta,
            season_length,
        } => {
            parameters.insert("alpha".into(), alpha);
            parameters.insert("gamma".into(), gamma);
            parameters.insert("delta".into(), delta);
            parameters.insert("season_length".into(), season_length as f64);
        }
    }
    ForecastReportRow {
        model: result.spec.family_name().to_string(),
        parameters,
        mape: result.mape,
    }
}

/// The best cell of each family, in overall rank order.
pub fn forecast_report(grid: &GridSearch) -> ForecastReport {
    ForecastReport {
        models: grid.best_per_family().into_iter().map(report_row).collect(),
    }
}

pub fn write_forecast_json(path: &Path, report: &ForecastReport) -> Result<()> {
    write_json(path, report)
}

pub fn read_forecast_json(path: &Path) -> Result<ForecastReport> {
    read_json(path)
}

/// Per-period fitted values of one backtested model:
/// `period,actual_kg,fitted_kg` with the warm-up prefix left empty.
pub fn write_fitted_csv(
    path: &Path,
    labels: &[String],
    actuals: &[f64],
    fitted: &[Option<f64>],
) -> Result<()> {
    let mut out = String::from("period,actual_kg,fitted_kg\n");
    for i in 0..actuals.len() {
        let label = labels.get(i).map(String::as_str).unwrap_or("");
        let fit = fitted[i].map(|f| f.to_string()).unwrap_or_default();
        out.push_str(&format!("{label},{},{fit}\n", actuals[i]));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_fitted_csv(path: &Path) -> Result<Vec<(String, f64, Option<f64>)>> {
    #[derive(Deserialize)]
    struct Row {
        period: String,
        actual_kg: f64,
        fitted_kg: Option<f64>,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row.map_err(|e| csv_err(path, e))?;
        rows.push((row.period, row.actual_kg, row.fitted_kg));
    }
    Ok(rows)
}

/// Capacity line CSV: `n,available_kg,required_max_kg`.
pub fn write_capacity_csv(path: &Path, rows: &[CapacityRow]) -> Result<()> {
    let mut out = String::from("n,available_kg,required_max_kg\n");
    for row in rows {
        let required = row
            .required_max_kg
            .map(|r| r.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{required}\n",
            row.startups, row.available_kg
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_capacity_csv(path: &Path) -> Result<Vec<CapacityRow>> {
    #[derive(Deserialize)]
    struct Row {
        n: u32,
        available_kg: f64,
        required_max_kg: Option<f64>,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row.map_err(|e| csv_err(path, e))?;
        rows.push(CapacityRow {
            startups: row.n,
            available_kg: row.available_kg,
            required_max_kg: row.required_max_kg,
            sufficient: row.required_max_kg.map(|r| row.available_kg >= r),
        });
    }
    Ok(rows)
}

pub fn write_schedule_json(path: &Path, result: &SolveResult) -> Result<()> {
    write_json(path, result)
}

pub fn read_schedule_json(path: &Path) -> Result<SolveResult> {
    read_json(path)
}

pub fn read_scenario_spec(path: &Path) -> Result<ScenarioSpec> {
    let spec: ScenarioSpec = read_json(path)?;
    spec.validate()?;
    Ok(spec)
}

pub fn write_scenario_spec(path: &Path, spec: &ScenarioSpec) -> Result<()> {
    write_json(path, spec)
}

/// Sweep results CSV: `month,A_kg,demand_kg,unserved,Z_kg`; failed cells
/// leave the result columns empty.
pub fn write_scenario_csv(path: &Path, cells: &[SweepCell]) -> Result<()> {
    let mut out = String::from("month,A_kg,demand_kg,unserved,Z_kg\n");
    for c in cells {
        let unserved = c.unserved.map(|u| u.to_string()).unwrap_or_default();
        let z = c.z_kg.map(|z| z.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{unserved},{z}\n",
            c.month, c.a_kg, c.demand_kg
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_scenario_csv(path: &Path) -> Result<Vec<SweepCell>> {
    #[derive(Deserialize)]
    struct Row {
        month: usize,
        #[serde(rename = "A_kg")]
        a_kg: f64,
        demand_kg: f64,
        unserved: Option<usize>,
        #[serde(rename = "Z_kg")]
        z_kg: Option<f64>,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut cells = Vec::new();
    for row in reader.deserialize() {
        let row: Row = row.map_err(|e| csv_err(path, e))?;
        cells.push(SweepCell {
            month: row.month,
            a_kg: row.a_kg,
            demand_kg: row.demand_kg,
            unserved: row.unserved,
            z_kg: row.z_kg,
            error: None,
        });
    }
    Ok(cells)
}
