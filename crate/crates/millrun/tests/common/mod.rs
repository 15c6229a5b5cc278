//! Shared helpers for the integration suites: seeded series and instance
//! generators, plus an independent brute-force re-implementation of the
//! forecasting grid used as the ranking oracle.

use millrun::forecast::ForecastModelSpec;
use millrun::model::{Machine, Order, PlantConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded AR(1) series with positive values.
pub fn ar1_series(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || {
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut series = Vec::with_capacity(len);
    let mut y = 100.0;
    for _ in 0..len {
        y = 30.0 + 0.7 * y + 5.0 * normal();
        series.push(y);
    }
    series
}

/// Desk-scale scheduling instance: 4..=8 orders, 2..=3 machines, warehouse
/// capacity drawn between the largest order and 1.5x the total load.
pub fn desk_instance(seed: u64) -> (Vec<Order>, PlantConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=8);
    let m = rng.random_range(2..=3);
    let machines: Vec<Machine> = (1..=m)
        .map(|id| {
            Machine::new(
                id as u32,
                rng.random_range(50.0..150.0),
                rng.random_range(0.7..1.0),
                rng.random_range(0.0..0.2),
                rng.random_range(0.0..6.0),
            )
            .unwrap()
        })
        .collect();
    let orders: Vec<Order> = (1..=n)
        .map(|id| {
            Order::new(
                id as u32,
                rng.random_range(50.0..400.0),
                rng.random_range(1..=10) as f64,
            )
            .unwrap()
        })
        .collect();
    let total: f64 = orders.iter().map(|o| o.quantity_kg()).sum();
    let max_q = orders.iter().map(|o| o.quantity_kg()).fold(0.0, f64::max);
    let a = rng.random_range(max_q..1.5 * total);
    (orders, PlantConfig::new(machines, 8.0, a).unwrap())
}

/// Independent re-implementation of the grid: every model recomputed from
/// scratch at each period (quadratic, deliberately naive), the same cell
/// lattice enumerated from its written definition, and the same tie-break
/// order. Nothing here calls into the library's fitting code.
pub mod naive_grid {
    use super::ForecastModelSpec;

    fn forecast_at(series: &[f64], spec: &ForecastModelSpec, t: usize) -> Option<f64> {
        match *spec {
            ForecastModelSpec::Mean => {
                if t < 1 {
                    return None;
                }
                let mut sum = 0.0;
                for v in series[..t].iter().rev() {
                    sum += v;
                }
                Some(sum / t as f64)
            }
            ForecastModelSpec::MovingAverage { window } => {
                if t < window {
                    return None;
                }
                let mut sum = 0.0;
                for v in &series[t - window..t] {
                    sum += v;
                }
                Some(sum / window as f64)
            }
            ForecastModelSpec::Ses { alpha } => {
                if t < 1 {
                    return None;
                }
                // Closed-form geometric unrolling of the recursion.
                let mut f = (1.0 - alpha).powi(t as i32 - 1) * series[0];
                for i in 1..t {
                    f += alpha * (1.0 - alpha).powi((t - 1 - i) as i32) * series[i];
                }
                Some(f)
            }
            ForecastModelSpec::Holt { alpha, gamma } => {
                if t < 2 {
                    return None;
                }
                let mut level = series[0];
                let mut trend = series[1] - series[0];
                for u in 2..t {
                    let new_level = alpha * series[u] + (1.0 - alpha) * (level + trend);
                    trend = gamma * (new_level - level) + (1.0 - gamma) * trend;
                    level = new_level;
                }
                Some(level + trend)
            }
            ForecastModelSpec::Winters {
                alpha,
                gamma,
                delta,
                season_length: s,
            } => {
                if t < 2 * s {
                    return None;
                }
                let mean1: f64 = series[..s].iter().sum::<f64>() / s as f64;
                let mean2: f64 = series[s..2 * s].iter().sum::<f64>() / s as f64;
                let mut index: Vec<f64> = series[..s].iter().map(|&y| y / mean1).collect();
                let mut level = mean1;
                let mut trend = (mean2 - mean1) / s as f64;
                for u in s..t {
                    let pos = u % s;
                    let new_level =
                        alpha * series[u] / index[pos] + (1.0 - alpha) * (level + trend);
                    trend = gamma * (new_level - level) + (1.0 - gamma) * trend;
                    index[pos] = delta * series[u] / new_level + (1.0 - delta) * index[pos];
                    level = new_level;
                }
                Some((level + trend) * index[t % s])
            }
            ForecastModelSpec::LinearRegression => {
                if t < 2 {
                    return None;
                }
                // Centered OLS, a different algebraic route than running sums.
                let xs: Vec<f64> = (0..t).map(|i| i as f64).collect();
                let xbar = xs.iter().sum::<f64>() / t as f64;
                let ybar = series[..t].iter().sum::<f64>() / t as f64;
                let mut sxy = 0.0;
                let mut sxx = 0.0;
                for i in 0..t {
                    sxy += (xs[i] - xbar) * (series[i] - ybar);
                    sxx += (xs[i] - xbar) * (xs[i] - xbar);
                }
                let slope = sxy / sxx;
                Some(ybar + slope * (t as f64 - xbar))
            }
        }
    }

    fn mape_of(series: &[f64], spec: &ForecastModelSpec) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for t in 0..series.len() {
            if let Some(f) = forecast_at(series, spec, t) {
                if series[t] > 0.0 {
                    sum += (series[t] - f).abs() / series[t];
                    count += 1;
                }
            }
        }
        assert!(count > 0, "no scored periods for {spec:?}");
        sum / count as f64
    }

    fn min_len(spec: &ForecastModelSpec) -> usize {
        match *spec {
            ForecastModelSpec::Mean | ForecastModelSpec::Ses { .. } => 2,
            ForecastModelSpec::MovingAverage { window } => window + 1,
            ForecastModelSpec::Holt { .. } | ForecastModelSpec::LinearRegression => 3,
            ForecastModelSpec::Winters { season_length, .. } => 2 * season_length + 1,
        }
    }

    fn param_count(spec: &ForecastModelSpec) -> usize {
        match spec {
            ForecastModelSpec::Mean | ForecastModelSpec::LinearRegression => 0,
            ForecastModelSpec::MovingAverage { .. } | ForecastModelSpec::Ses { .. } => 1,
            ForecastModelSpec::Holt { .. } => 2,
            ForecastModelSpec::Winters { .. } => 3,
        }
    }

    fn kind_rank(spec: &ForecastModelSpec) -> u8 {
        match spec {
            ForecastModelSpec::Mean => 0,
            ForecastModelSpec::MovingAverage { .. } => 1,
            ForecastModelSpec::Ses { .. } => 2,
            ForecastModelSpec::Holt { .. } => 3,
            ForecastModelSpec::Winters { .. } => 4,
            ForecastModelSpec::LinearRegression => 5,
        }
    }

    fn params(spec: &ForecastModelSpec) -> (usize, f64, f64, f64, usize) {
        match *spec {
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

    fn compare(a: &(ForecastModelSpec, f64), b: &(ForecastModelSpec, f64)) -> std::cmp::Ordering {
        a.1.partial_cmp(&b.1)
            .unwrap()
            .then(param_count(&a.0).cmp(&param_count(&b.0)))
            .then(kind_rank(&a.0).cmp(&kind_rank(&b.0)))
            .then_with(|| {
                let (ka, kb) = (params(&a.0), params(&b.0));
                ka.0.cmp(&kb.0)
                    .then(ka.1.partial_cmp(&kb.1).unwrap())
                    .then(ka.2.partial_cmp(&kb.2).unwrap())
                    .then(ka.3.partial_cmp(&kb.3).unwrap())
                    .then(ka.4.cmp(&kb.4))
            })
    }

    /// The full ranked grid: (spec, mape) ascending.
    pub fn run(series: &[f64], season_length: usize) -> Vec<(ForecastModelSpec, f64)> {
        let mut cells = vec![ForecastModelSpec::Mean];
        for window in 2..=23usize {
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
        cells.retain(|c| series.len() >= min_len(c));

        let mut scored: Vec<(ForecastModelSpec, f64)> =
            cells.iter().map(|c| (*c, mape_of(series, c))).collect();

        // Refine around the best coarse Winters triple, same protocol:
        // +/- 4 percent points at step 1, coarse point excluded.
        if let Some(&(
            ForecastModelSpec::Winters {
                alpha,
                gamma,
                delta,
                season_length,
            },
            _,
        )) = scored
            .iter()
            .filter(|(s, _)| matches!(s, ForecastModelSpec::Winters { .. }))
            .min_by(|a, b| compare(a, b))
        {
            let base = (
                (alpha * 100.0).round() as i32,
                (gamma * 100.0).round() as i32,
                (delta * 100.0).round() as i32,
            );
            for da in -4..=4i32 {
                for dg in -4..=4i32 {
                    for dd in -4..=4i32 {
                        if da == 0 && dg == 0 && dd == 0 {
                            continue;
                        }
                        let (a, g, d) = (base.0 + da, base.1 + dg, base.2 + dd);
                        if (1..=99).contains(&a) && (1..=99).contains(&g) && (1..=99).contains(&d) {
                            let cell = ForecastModelSpec::Winters {
                                alpha: a as f64 / 100.0,
                                gamma: g as f64 / 100.0,
                                delta: d as f64 / 100.0,
                                season_length,
                            };
                            scored.push((cell, mape_of(series, &cell)));
                        }
                    }
                }
            }
        }

        scored.sort_by(compare);
        scored
    }
}
