//! Time-series forecasting: six model families backtested with causal
//! one-step-ahead forecasts and ranked by MAPE over a deterministic
//! hyperparameter grid.
//!
//! Causality is the load-bearing contract here: the forecast for period t
//! is computed before the observation at t is folded into any state, so
//! perturbing y[t] can never change a fitted value at or before t.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Winters season length (monthly data).
pub const DEFAULT_SEASON_LENGTH: usize = 12;

/// Moving-average window range evaluated by the grid.
pub const MA_WINDOW_RANGE: std::ops::RangeInclusive<usize> = 2..=23;

/// A fully parameterized forecast model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ForecastModelSpec {
    /// Expanding mean of all history.
    Mean,
    /// Mean of the last `window` observations.
    MovingAverage { window: usize },
    /// Simple exponential smoothing.
    Ses { alpha: f64 },
    /// Double exponential smoothing (level + trend).
    Holt { alpha: f64, gamma: f64 },
    /// Triple exponential smoothing, multiplicative seasonality.
    Winters {
        alpha: f64,
        gamma: f64,
        delta: f64,
        season_length: usize,
    },
    /// Ordinary least squares on the time index, refit on each prefix.
    LinearRegression,
}

impl ForecastModelSpec {
    pub fn validate(&self) -> Result<()> {
        let frac = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Forecast(format!(
                    "{name} must lie in the open interval (0, 1), got {v}"
                )));
            }
            Ok(())
        };
        match *self {
            ForecastModelSpec::Mean | ForecastModelSpec::LinearRegression => Ok(()),
            ForecastModelSpec::MovingAverage { window } => {
                if !MA_WINDOW_RANGE.contains(&window) {
                    return Err(Error::Forecast(format!(
                        "moving-average window must lie in {:?}, got {window}",
                        MA_WINDOW_RANGE
                    )));
                }
                Ok(())
            }
            ForecastModelSpec::Ses { alpha } => frac("alpha", alpha),
            ForecastModelSpec::Holt { alpha, gamma } => {
                frac("alpha", alpha)?;
                frac("gamma", gamma)
            }
            ForecastModelSpec::Winters {
                alpha,
                gamma,
                delta,
                season_length,
            } => {
                frac("alpha", alpha)?;
                frac("gamma", gamma)?;
                frac("delta", delta)?;
                if season_length < 2 {
                    return Err(Error::Forecast(format!(
                        "season length must be at least 2, got {season_length}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Index of the first period with a defined one-step-ahead forecast.
    pub fn warmup(&self) -> usize {
        match *self {
            ForecastModelSpec::Mean | ForecastModelSpec::Ses { .. } => 1,
            ForecastModelSpec::MovingAverage { window } => window,
            ForecastModelSpec::Holt { .. } | ForecastModelSpec::LinearRegression => 2,
            ForecastModelSpec::Winters { season_length, .. } => 2 * season_length,
        }
    }

    /// Shortest series the model can be scored on (warm-up plus one point).
    pub fn min_len(&self) -> usize {
        self.warmup() + 1
    }

    /// Number of free hyperparameters, the first MAPE tie-breaker.
    pub fn param_count(&self) -> usize {
        match self {
            ForecastModelSpec::Mean | ForecastModelSpec::LinearRegression => 0,
            ForecastModelSpec::MovingAverage { .. } | ForecastModelSpec::Ses { .. } => 1,
            ForecastModelSpec::Holt { .. } => 2,
            ForecastModelSpec::Winters { .. } => 3,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ForecastModelSpec::Mean => "mean",
            ForecastModelSpec::MovingAverage { .. } => "moving_average",
            ForecastModelSpec::Ses { .. } => "ses",
            ForecastModelSpec::Holt { .. } => "holt",
            ForecastModelSpec::Winters { .. } => "winters",
            ForecastModelSpec::LinearRegression => "linear_regression",
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            ForecastModelSpec::Mean => 0,
            ForecastModelSpec::MovingAverage { .. } => 1,
            ForecastModelSpec::Ses { .. } => 2,
            ForecastModelSpec::Holt { .. } => 3,
            ForecastModelSpec::Winters { .. } => 4,
            ForecastModelSpec::LinearRegression => 5,
        }
    }

    // (window, alpha, gamma, delta, season) padded with zeros, for the
    // final deterministic tie-break.
    fn param_key(&self) -> (usize, f64, f64, f64, usize) {
        match *self {
            ForecastModelSpec::Mean | ForecastModelSpec::LinearRegression => (0, 0.0, 0.0, 0.0, 0),
            ForecastModelSpec::MovingAverage { window } => (window, 0.0, 0.0, 0.0, 0),
            ForecastModelSpec::Ses { alpha } => (0, alpha, 0.0, 0.0, 0),
            ForecastModelSpec::Holt { alpha, gamma } => (0, alpha, gamma, 0.0, 0),
            ForecastModelSpec::Winters {
                alpha,
                gamma,
                delta,
                season_length,
            } => (0, alpha, gamma, delta, season_length),
        }
    }
}

/// One backtested model: per-period one-step-ahead forecasts (None during
/// warm-up) and the MAPE over scored periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub spec: ForecastModelSpec,
    pub fitted: Vec<Option<f64>>,
    pub mape: f64,
    pub warnings: Vec<String>,
}

/// Mean absolute percentage error over aligned actual/forecast pairs.
/// Every position is scored, so all actuals must be positive.
pub fn mape(actuals: &[f64], forecasts: &[f64]) -> Result<f64> {
    if actuals.len() != forecasts.len() {
        return Err(Error::Forecast(format!(
            "actuals and forecasts must align, got {} vs {}",
            actuals.len(),
            forecasts.len()
        )));
    }
    if actuals.is_empty() {
        return Err(Error::Forecast(
            "MAPE over an empty set is undefined".into(),
        ));
    }
    let mut sum = 0.0;
    for (i, (&a, &f)) in actuals.iter().zip(forecasts).enumerate() {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Forecast(format!(
                "actual at position {} must be positive to score MAPE, got {a}",
                i + 1
            )));
        }
        sum += (a - f).abs() / a;
    }
    Ok(sum / actuals.len() as f64)
}

/// Backtests one model over the series: causal one-step-ahead forecasts,
/// then MAPE over the periods that have both a defined forecast and a
/// positive actual. Non-positive actuals are excluded with a warning.
pub fn fit_forecast(series: &[f64], spec: &ForecastModelSpec) -> Result<BacktestResult> {
    spec.validate()?;
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Forecast("series values must be finite".into()));
    }
    if series.len() < spec.min_len() {
        return Err(Error::InsufficientHistory {
            model: spec.family_name().to_string(),
            needed: spec.min_len(),
            got: series.len(),
        });
    }
    if matches!(spec, ForecastModelSpec::Winters { .. }) && series.iter().any(|&v| v <= 0.0) {
        return Err(Error::Forecast(
            "multiplicative Winters requires strictly positive values".into(),
        ));
    }

    let fitted = match *spec {
        ForecastModelSpec::Mean => fit_mean(series),
        ForecastModelSpec::MovingAverage { window } => fit_moving_average(series, window),
        ForecastModelSpec::Ses { alpha } => fit_ses(series, alpha),
        ForecastModelSpec::Holt { alpha, gamma } => fit_holt(series, alpha, gamma),
        ForecastModelSpec::Winters {
            alpha,
            gamma,
            delta,
            season_length,
        } => fit_winters(series, alpha, gamma, delta, season_length),
        ForecastModelSpec::LinearRegression => fit_linear_regression(series),
    };
    debug_assert_eq!(fitted.len(), series.len());

    let mut warnings = Vec::new();
    let mut scored_a = Vec::new();
    let mut scored_f = Vec::new();
    for (i, (&a, f)) in series.iter().zip(&fitted).enumerate() {
        let Some(f) = *f else { continue };
        if a > 0.0 {
            scored_a.push(a);
            scored_f.push(f);
        } else {
            warnings.push(format!(
                "period {}: actual {a} is not positive, excluded from MAPE",
                i + 1
            ));
        }
    }
    if scored_a.is_empty() {
        return Err(Error::Forecast(
            "no scorable periods after warm-up (MAPE set is empty)".into(),
        ));
    }
    let mape = mape(&scored_a, &scored_f)?;

    Ok(BacktestResult {
        spec: *spec,
        fitted,
        mape,
        warnings,
    })
}

fn fit_mean(series: &[f64]) -> Vec<Option<f64>> {
    let mut fitted = vec![None; series.len()];
    let mut sum = series[0];
    for t in 1..series.len() {
        fitted[t] = Some(sum / t as f64);
        sum += series[t];
    }
    fitted
}

fn fit_moving_average(series: &[f64], window: usize) -> Vec<Option<f64>> {
    let mut fitted = vec![None; series.len()];
    for t in window..series.len() {
        let sum: f64 = series[t - window..t].iter().sum();
        fitted[t] = Some(sum / window as f64);
    }
    fitted
}

fn fit_ses(series: &[f64], alpha: f64) -> Vec<Option<f64>> {
    let mut fitted = vec![None; series.len()];
    // Level seeded with the first observation.
    let mut level = series[0];
    for t in 1..series.len() {
        fitted[t] = Some(level);
        level = alpha * series[t] + (1.0 - alpha) * level;
    }
    fitted
}

fn fit_holt(series: &[f64], alpha: f64, gamma: f64) -> Vec<Option<f64>> {
    let mut fitted = vec![None; series.len()];
    // Level = first observation, trend = second minus first.
    let mut level = series[0];
    let mut trend = series[1] - series[0];
    for t in 2..series.len() {
        fitted[t] = Some(level + trend);
        let new_level = alpha * series[t] + (1.0 - alpha) * (level + trend);
        trend = gamma * (new_level - level) + (1.0 - gamma) * trend;
        level = new_level;
    }
    fitted
}

fn fit_winters(
    series: &[f64],
    alpha: f64,
    gamma: f64,
    delta: f64,
    season_length: usize,
) -> Vec<Option<f64>> {
    let s = season_length;
    let n = series.len();
    let mut fitted = vec![None; n];

    // Seasonal indices from the first season; level = first-season mean;
    // trend = (second-season mean - first-season mean) / season length.
    let mean1: f64 = series[..s].iter().sum::<f64>() / s as f64;
    let mean2: f64 = series[s..2 * s].iter().sum::<f64>() / s as f64;
    let mut index: Vec<f64> = series[..s].iter().map(|&y| y / mean1).collect();
    let mut level = mean1;
    let mut trend = (mean2 - mean1) / s as f64;

    // The recursion warms through the second season; forecasts before the
    // third season are left undefined.
    for t in s..n {
        let pos = t % s;
        let forecast = (level + trend) * index[pos];
        if t >= 2 * s {
            fitted[t] = Some(forecast);
        }
        let new_level = alpha * series[t] / index[pos] + (1.0 - alpha) * (level + trend);
        trend = gamma * (new_level - level) + (1.0 - gamma) * trend;
        index[pos] = delta * series[t] / new_level + (1.0 - delta) * index[pos];
        level = new_level;
    }
    fitted
}

fn fit_linear_regression(series: &[f64]) -> Vec<Option<f64>> {
    let mut fitted = vec![None; series.len()];
    // Running sums over the prefix 0..t with x = period index.
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in 0..series.len() {
        if t >= 2 {
            let nf = t as f64;
            let denom = nf * sxx - sx * sx;
            let slope = (nf * sxy - sx * sy) / denom;
            let intercept = (sy - slope * sx) / nf;
            fitted[t] = Some(intercept + slope * nf);
        }
        let x = t as f64;
        sx += x;
        sy += series[t];
        sxx += x * x;
        sxy += x * series[t];
    }
    fitted
}

/// Outcome of the full model grid: every evaluated cell ranked ascending by
/// MAPE, plus warnings for families the series was too short for.
#[derive(Debug, Clone)]
pub struct GridSearch {
    pub ranked: Vec<BacktestResult>,
    pub warnings: Vec<String>,
}

impl GridSearch {
    pub fn best(&self) -> &BacktestResult {
        &self.ranked[0]
    }

    /// Best cell of each model family in overall rank order, the shape the
    /// report table uses.
    pub fn best_per_family(&self) -> Vec<&BacktestResult> {
        let mut seen: Vec<&'static str> = Vec::new();
        let mut out = Vec::new();
        for r in &self.ranked {
            let name = r.spec.family_name();
            if !seen.contains(&name) {
                seen.push(name);
                out.push(r);
            }
        }
        out
    }
}

/// Every grid cell evaluated, in deterministic enumeration order:
/// mean; moving averages for every window; SES and Holt on 0.01-step
/// smoothing grids; Winters on a 0.05-step coarse grid refined at
/// 0.01 around the best coarse cell; ordinary least squares.
pub fn grid_cells(series_len: usize, season_length: usize) -> Vec<ForecastModelSpec> {
    let mut cells = vec![ForecastModelSpec::Mean];
    for window in MA_WINDOW_RANGE {
        cells.push(ForecastModelSpec::MovingAverage { window });
    }
    for a in 1..=99u32 {
        cells.push(ForecastModelSpec::Ses {
            alpha: a as f64 / 100.0,
        });
    }
    for a in 1..=99u32 {
        for g in 1..=99u32 {
            cells.push(ForecastModelSpec::Holt {
                alpha: a as f64 / 100.0,
                gamma: g as f64 / 100.0,
            });
        }
    }
    // Winters refinement is resolved later because it depends on the data;
    // here only the coarse lattice is enumerated.
    for a in (5..=95u32).step_by(5) {
        for g in (5..=95u32).step_by(5) {
            for d in (5..=95u32).step_by(5) {
                cells.push(ForecastModelSpec::Winters {
                    alpha: a as f64 / 100.0,
                    gamma: g as f64 / 100.0,
                    delta: d as f64 / 100.0,
                    season_length,
                });
            }
        }
    }
    cells.push(ForecastModelSpec::LinearRegression);
    // Rows the series cannot support are dropped here so the caller sees
    // exactly what will be evaluated.
    cells.retain(|c| series_len >= c.min_len());
    cells
}

/// Winters cells refining the best coarse triple: every 0.01 offset within
/// +/-0.04 of it (the coarse point itself excluded). Deterministic.
pub fn winters_refinement(best: &ForecastModelSpec) -> Vec<ForecastModelSpec> {
    let ForecastModelSpec::Winters {
        alpha,
        gamma,
        delta,
        season_length,
    } = *best
    else {
        return Vec::new();
    };
    let base = (
        (alpha * 100.0).round() as i32,
        (gamma * 100.0).round() as i32,
        (delta * 100.0).round() as i32,
    );
    let mut cells = Vec::new();
    for da in -4..=4i32 {
        for dg in -4..=4i32 {
            for dd in -4..=4i32 {
                if da == 0 && dg == 0 && dd == 0 {
                    continue;
                }
                let (a, g, d) = (base.0 + da, base.1 + dg, base.2 + dd);
                if (1..=99).contains(&a) && (1..=99).contains(&g) && (1..=99).contains(&d) {
                    cells.push(ForecastModelSpec::Winters {
                        alpha: a as f64 / 100.0,
                        gamma: g as f64 / 100.0,
                        delta: d as f64 / 100.0,
                        season_length,
                    });
                }
            }
        }
    }
    cells
}

/// Ascending by MAPE; ties broken toward the simpler model (fewer
/// hyperparameters), then by family, then by smaller parameter values.
pub fn compare_results(
    a: &(ForecastModelSpec, f64),
    b: &(ForecastModelSpec, f64),
) -> std::cmp::Ordering {
    a.1.partial_cmp(&b.1)
        .expect("MAPE is finite")
        .then(a.0.param_count().cmp(&b.0.param_count()))
        .then(a.0.kind_rank().cmp(&b.0.kind_rank()))
        .then_with(|| {
            let ka = a.0.param_key();
            let kb = b.0.param_key();
            ka.0.cmp(&kb.0)
                .then(ka.1.partial_cmp(&kb.1).unwrap())
                .then(ka.2.partial_cmp(&kb.2).unwrap())
                .then(ka.3.partial_cmp(&kb.3).unwrap())
                .then(ka.4.cmp(&kb.4))
        })
}

/// Evaluates the whole grid with the default season length and returns all
/// results ranked. Families the series is too short for are dropped with a
/// warning; if nothing fits, that is an error.
pub fn grid_search(series: &[f64]) -> Result<GridSearch> {
    grid_search_with_season(series, DEFAULT_SEASON_LENGTH)
}

pub fn grid_search_with_season(series: &[f64], season_length: usize) -> Result<GridSearch> {
    let mut warnings = Vec::new();
    let families: [(&str, ForecastModelSpec); 6] = [
        ("mean", ForecastModelSpec::Mean),
        (
            "moving_average",
            ForecastModelSpec::MovingAverage { window: 2 },
        ),
        ("ses", ForecastModelSpec::Ses { alpha: 0.5 }),
        (
            "holt",
            ForecastModelSpec::Holt {
                alpha: 0.5,
                gamma: 0.5,
            },
        ),
        (
            "winters",
            ForecastModelSpec::Winters {
                alpha: 0.5,
                gamma: 0.5,
                delta: 0.5,
                season_length,
            },
        ),
        ("linear_regression", ForecastModelSpec::LinearRegression),
    ];
    for (name, probe) in &families {
        if series.len() < probe.min_len() {
            warnings.push(format!(
                "{name}: needs at least {} periods, got {}; dropped from the grid",
                probe.min_len(),
                series.len()
            ));
        }
    }

    let cells = grid_cells(series.len(), season_length);
    if cells.is_empty() {
        return Err(Error::InsufficientHistory {
            model: "every grid model".into(),
            needed: ForecastModelSpec::Mean.min_len(),
            got: series.len(),
        });
    }

    let mut results: Vec<BacktestResult> = Vec::with_capacity(cells.len() + 729);
    for cell in &cells {
        results.push(fit_forecast(series, cell)?);
    }

    // Local refinement around the best coarse Winters cell.
    if let Some(best_winters) = results
        .iter()
        .filter(|r| matches!(r.spec, ForecastModelSpec::Winters { .. }))
        .min_by(|a, b| compare_results(&(a.spec, a.mape), &(b.spec, b.mape)))
        .map(|r| r.spec)
    {
        for cell in winters_refinement(&best_winters) {
            results.push(fit_forecast(series, &cell)?);
        }
    }

    results.sort_by(|a, b| compare_results(&(a.spec, a.mape), &(b.spec, b.mape)));
    Ok(GridSearch {
        ranked: results,
        warnings,
    })
}
