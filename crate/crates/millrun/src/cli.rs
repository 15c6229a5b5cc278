//! Command-line entry point wiring ingestion, analytics, forecasting,
//! capacity, scheduling, and scenario runs.
//!
//! Exit codes: 0 on success, 2 when the model itself says "infeasible"
//! (--require-full-service with unserved orders), 1 for any program or
//! input error. Diagnostics are single-line and prefixed with the
//! subsystem that raised them.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::solver::SolveMethod;
use crate::{capacity, demand, forecast, io, scenario, solver};

/// Environment variable consulted when no --seed flag is given.
pub const SEED_ENV_VAR: &str = "MILLRUN_SEED";

const EXIT_OK: i32 = 0;
const EXIT_ERROR: i32 = 1;
const EXIT_INFEASIBLE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "millrun",
    version,
    about = "Production-planning toolkit: demand analytics, forecast ranking, capacity lines, and warehouse-constrained order scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Oracle,
    Greedy,
    Local,
}

impl From<MethodArg> for SolveMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Oracle => SolveMethod::Oracle,
            MethodArg::Greedy => SolveMethod::Greedy,
            MethodArg::Local => SolveMethod::LocalSearch,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Demand statistics: unmet-demand ratio, normal fit, normality check
    Analyze {
        /// Demand history CSV (period,demand_kg,sales_kg)
        #[arg(long)]
        input: PathBuf,
        /// JSON report path; stdout summary only when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Backtest the forecasting model grid and rank by MAPE
    Forecast {
        /// Demand history CSV (period,demand_kg,sales_kg)
        #[arg(long)]
        input: PathBuf,
        /// Evaluate the full hyperparameter grid (the only supported mode)
        #[arg(long, default_value_t = true)]
        grid: bool,
        /// JSON ranking report path
        #[arg(long)]
        report: PathBuf,
        /// Fitted-values CSV for the best model; derived from the report
        /// path when omitted
        #[arg(long)]
        fitted: Option<PathBuf>,
        /// Winters season length
        #[arg(long, default_value_t = forecast::DEFAULT_SEASON_LENGTH)]
        season_length: usize,
    },
    /// Available capacity as a function of monthly startups
    Capacity {
        /// Machine park CSV (id,t_kg_h,e,m,s_h)
        #[arg(long)]
        plant: PathBuf,
        /// Plant config file (key = value)
        #[arg(long)]
        config: PathBuf,
        /// Largest startup count to tabulate
        #[arg(long, default_value_t = 120)]
        n_max: u32,
        /// Demand history CSV for the sufficiency verdict
        #[arg(long)]
        demand: Option<PathBuf>,
        /// Output CSV path (n,available_kg,required_max_kg)
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the order-to-machine assignment model
    Schedule {
        /// Orders CSV (id,q_kg,due_days)
        #[arg(long)]
        orders: PathBuf,
        /// Machine park CSV (id,t_kg_h,e,m,s_h)
        #[arg(long)]
        plant: PathBuf,
        /// Plant config file (key = value)
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Local)]
        method: MethodArg,
        /// Solver seed; repeatable, last value wins (MILLRUN_SEED as fallback)
        #[arg(long, action = ArgAction::Append)]
        seed: Vec<u64>,
        /// Local-search evaluation budget
        #[arg(long, default_value_t = solver::DEFAULT_LOCAL_BUDGET)]
        budget: u64,
        /// Override the config file's slack epsilon (hours)
        #[arg(long)]
        slack_epsilon: Option<f64>,
        /// Exit 2 unless every order is served
        #[arg(long)]
        require_full_service: bool,
        /// Output JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep monthly demands across warehouse capacities
    Scenario {
        /// Scenario spec JSON
        #[arg(long)]
        spec: PathBuf,
        /// Machine park CSV (id,t_kg_h,e,m,s_h)
        #[arg(long)]
        plant: PathBuf,
        /// Plant config file (key = value)
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Local)]
        method: MethodArg,
        /// Override the spec's seed; repeatable, last value wins
        #[arg(long, action = ArgAction::Append)]
        seed: Vec<u64>,
        /// Output CSV path (month,A_kg,demand_kg,unserved,Z_kg)
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses and runs. Returns the process exit code; never calls exit itself
/// so tests can drive it in-process.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            // First line only: diagnostics stay grep-friendly.
            let line = e.to_string();
            eprintln!("{}", line.lines().next().unwrap_or("cli: bad arguments"));
            return EXIT_ERROR;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            EXIT_ERROR
        }
    }
}

fn check_exists(paths: &[&Path]) -> Result<()> {
    for path in paths {
        if !path.exists() {
            return Err(Error::io(
                *path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
            ));
        }
    }
    Ok(())
}

/// Last --seed wins (with a warning when several were given); falls back to
/// MILLRUN_SEED, then to `default`.
fn resolve_seed(flags: &[u64], default: u64) -> Result<u64> {
    if flags.len() > 1 {
        eprintln!(
            "warning: --seed given {} times; using the last value {}",
            flags.len(),
            flags.last().unwrap()
        );
    }
    if let Some(seed) = flags.last() {
        return Ok(*seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("{SEED_ENV_VAR} must be an integer, got `{text}`"))),
        Err(_) => Ok(default),
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Analyze { input, out } => run_analyze(&input, out.as_deref()),
        Command::Forecast {
            input,
            grid,
            report,
            fitted,
            season_length,
        } => run_forecast(&input, grid, &report, fitted.as_deref(), season_length),
        Command::Capacity {
            plant,
            config,
            n_max,
            demand,
            out,
        } => run_capacity(&plant, &config, n_max, demand.as_deref(), &out),
        Command::Schedule {
            orders,
            plant,
            config,
            method,
            seed,
            budget,
            slack_epsilon,
            require_full_service,
            out,
        } => run_schedule(
            &orders,
            &plant,
            &config,
            method.into(),
            &seed,
            budget,
            slack_epsilon,
            require_full_service,
            &out,
        ),
        Command::Scenario {
            spec,
            plant,
            config,
            method,
            seed,
            out,
        } => run_scenario(&spec, &plant, &config, method.into(), &seed, &out),
    }
}

fn run_analyze(input: &Path, out: Option<&Path>) -> Result<i32> {
    check_exists(&[input])?;
    let table = io::read_demand_csv(input)?;
    let series = &table.series;

    let fit = demand::descriptive_stats(series)?;
    let cv = demand::coefficient_of_variation(&fit)?;

    let d_ins = if series.periods().iter().all(|p| p.sales_kg.is_some()) {
        Some(demand::unmet_demand_ratio(series)?)
    } else {
        eprintln!("warning: sales column incomplete; d_ins omitted");
        None
    };

    let (ad_stat, ad_p) = match demand::anderson_darling(series) {
        Ok(ad) => (Some(ad.statistic), Some(ad.p_value)),
        Err(e) => {
            eprintln!("warning: normality check skipped: {e}");
            (None, None)
        }
    };

    let report = io::AnalysisReport {
        d_ins,
        mu: fit.mu(),
        sigma: fit.sigma(),
        cv,
        ad_stat,
        ad_p,
    };
    match out {
        Some(path) => io::write_analysis_json(path, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    Ok(EXIT_OK)
}

fn run_forecast(
    input: &Path,
    grid: bool,
    report_path: &Path,
    fitted_path: Option<&Path>,
    season_length: usize,
) -> Result<i32> {
    check_exists(&[input])?;
    if !grid {
        return Err(Error::Forecast(
            "only the grid mode is implemented; drop --grid=false".into(),
        ));
    }
    let table = io::read_demand_csv(input)?;
    let demands = table.series.demands();

    let grid = forecast::grid_search_with_season(&demands, season_length)?;
    for w in &grid.warnings {
        eprintln!("warning: {w}");
    }
    io::write_forecast_json(report_path, &io::forecast_report(&grid))?;

    let fitted_path = match fitted_path {
        Some(p) => p.to_path_buf(),
        None => derive_fitted_path(report_path),
    };
    let best = grid.best();
    io::write_fitted_csv(&fitted_path, &table.labels, &demands, &best.fitted)?;
    println!(
        "best model: {} (MAPE {:.4}); report {}, fitted values {}",
        best.spec.family_name(),
        best.mape,
        report_path.display(),
        fitted_path.display()
    );
    Ok(EXIT_OK)
}

fn derive_fitted_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "forecast".into());
    report.with_file_name(format!("{stem}_fitted.csv"))
}

fn run_capacity(
    plant_csv: &Path,
    config: &Path,
    n_max: u32,
    demand_csv: Option<&Path>,
    out: &Path,
) -> Result<i32> {
    check_exists(&[plant_csv, config])?;
    if let Some(d) = demand_csv {
        check_exists(&[d])?;
    }
    let machines = io::read_machines_csv(plant_csv)?;
    let plant = io::read_plant_cfg(config, machines)?;
    let table = demand_csv.map(io::read_demand_csv).transpose()?;

    let rows = capacity::capacity_report(&plant, table.as_ref().map(|t| &t.series), n_max)?;
    io::write_capacity_csv(out, &rows)?;

    let profile = capacity::capacity_profile(&plant);
    println!(
        "nominal {} kg/month, {} kg lost per startup; wrote {} rows to {}",
        profile.nominal_kg_month(),
        profile.loss_per_start_kg(),
        rows.len(),
        out.display()
    );
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn run_schedule(
    orders_csv: &Path,
    plant_csv: &Path,
    config: &Path,
    method: SolveMethod,
    seed_flags: &[u64],
    budget: u64,
    slack_epsilon: Option<f64>,
    require_full_service: bool,
    out: &Path,
) -> Result<i32> {
    check_exists(&[orders_csv, plant_csv, config])?;
    let orders = io::read_orders_csv(orders_csv)?;
    let machines = io::read_machines_csv(plant_csv)?;
    let mut plant = io::read_plant_cfg(config, machines)?;
    if let Some(eps) = slack_epsilon {
        plant = plant.with_slack_epsilon(eps)?;
    }
    let seed = resolve_seed(seed_flags, 0)?;

    let result = match method {
        SolveMethod::Oracle => {
            solver::solve_exhaustive(&orders, &plant, solver::DEFAULT_ORACLE_LIMIT)?
        }
        SolveMethod::Greedy => solver::solve_greedy(&orders, &plant)?,
        SolveMethod::LocalSearch => solver::solve_local_search(&orders, &plant, seed, budget)?,
    };
    io::write_schedule_json(out, &result)?;
    println!(
        "{}: Z = {} kg, {} of {} orders unserved; wrote {}",
        result.method,
        result.objective_kg(),
        result.unserved_count(),
        orders.len(),
        out.display()
    );
    if require_full_service && !result.unserved_ids.is_empty() {
        eprintln!(
            "schedule: infeasible to serve all orders; unserved ids {:?}",
            result.unserved_ids
        );
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(EXIT_OK)
}

fn run_scenario(
    spec_path: &Path,
    plant_csv: &Path,
    config: &Path,
    method: SolveMethod,
    seed_flags: &[u64],
    out: &Path,
) -> Result<i32> {
    check_exists(&[spec_path, plant_csv, config])?;
    let mut spec = io::read_scenario_spec(spec_path)?;
    let machines = io::read_machines_csv(plant_csv)?;
    let plant = io::read_plant_cfg(config, machines)?;
    spec.seed = resolve_seed(seed_flags, spec.seed)?;

    let cells = scenario::warehouse_sweep(&spec, &plant, method)?;
    for cell in cells.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "warning: month {} at A = {} kg failed: {}",
            cell.month,
            cell.a_kg,
            cell.error.as_deref().unwrap_or("")
        );
    }
    io::write_scenario_csv(out, &cells)?;
    println!("wrote {} sweep cells to {}", cells.len(), out.display());
    Ok(EXIT_OK)
}
