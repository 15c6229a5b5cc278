//! Demand analytics: unmet-demand quantification, normal fit, the
//! Anderson-Darling normality check, and tail probabilities over the fit.

use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::error::{Error, Result};

/// One month of history: demand (orders received) and, when known, sales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandPeriod {
    pub demand_kg: f64,
    pub sales_kg: Option<f64>,
}

/// Ordered monthly (demand, sales) history. Sales may be absent for
/// forecast-only series.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandSeries {
    periods: Vec<DemandPeriod>,
}

impl DemandSeries {
    pub fn new(periods: Vec<DemandPeriod>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::Demand("series must have at least one period".into()));
        }
        for (i, p) in periods.iter().enumerate() {
            if !p.demand_kg.is_finite() || p.demand_kg < 0.0 {
                return Err(Error::Demand(format!(
                    "period {}: demand must be finite and non-negative, got {}",
                    i + 1,
                    p.demand_kg
                )));
            }
            if let Some(v) = p.sales_kg {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Demand(format!(
                        "period {}: sales must be finite and non-negative, got {v}",
                        i + 1
                    )));
                }
            }
        }
        Ok(DemandSeries { periods })
    }

    pub fn from_demands(demands: &[f64]) -> Result<Self> {
        DemandSeries::new(
            demands
                .iter()
                .map(|&d| DemandPeriod {
                    demand_kg: d,
                    sales_kg: None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn periods(&self) -> &[DemandPeriod] {
        &self.periods
    }

    pub fn demands(&self) -> Vec<f64> {
        self.periods.iter().map(|p| p.demand_kg).collect()
    }

    pub fn max_demand(&self) -> f64 {
        self.periods
            .iter()
            .map(|p| p.demand_kg)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Normal fit of the demand distribution: sample mean and sample standard
/// deviation (n-1 denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    mu: f64,
    sigma: f64,
    n: usize,
}

impl NormalFit {
    pub fn new(mu: f64, sigma: f64, n: usize) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Demand(format!("mean must be finite, got {mu}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Demand(format!(
                "standard deviation must be positive, got {sigma}"
            )));
        }
        if n < 2 {
            return Err(Error::Demand(format!(
                "a normal fit needs at least 2 observations, got {n}"
            )));
        }
        Ok(NormalFit { mu, sigma, n })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Mean over periods of (demand - sales) / demand. Negative per-period
/// values (over-delivery) are kept, not clamped; clamping would bias the
/// estimate upward.
pub fn unmet_demand_ratio(series: &DemandSeries) -> Result<f64> {
    let mut sum = 0.0;
    for (i, p) in series.periods().iter().enumerate() {
        if p.demand_kg == 0.0 {
            return Err(Error::ZeroDemand { period: i + 1 });
        }
        let sales = p.sales_kg.ok_or(Error::MissingSales { period: i + 1 })?;
        sum += (p.demand_kg - sales) / p.demand_kg;
    }
    Ok(sum / series.len() as f64)
}

/// Sample mean and sample (n-1) standard deviation of the demand column.
pub fn descriptive_stats(series: &DemandSeries) -> Result<NormalFit> {
    let demands = series.demands();
    let n = demands.len();
    if n < 2 {
        return Err(Error::Demand(format!(
            "descriptive stats need at least 2 periods, got {n}"
        )));
    }
    let mean = demands.iter().sum::<f64>() / n as f64;
    let ss: f64 = demands.iter().map(|d| (d - mean) * (d - mean)).sum();
    let sigma = (ss / (n as f64 - 1.0)).sqrt();
    if sigma == 0.0 {
        return Err(Error::Demand(
            "constant series: standard deviation is zero".into(),
        ));
    }
    NormalFit::new(mean, sigma, n)
}

/// Anderson-Darling A-squared statistic and approximate p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AndersonDarling {
    pub statistic: f64,
    pub p_value: f64,
}

/// Anderson-Darling normality test with mean and variance estimated from
/// the sample (the composite case). The statistic gets the small-sample
/// correction A*2 = A2 (1 + 0.75/n + 2.25/n^2) and the p-value the
/// standard piecewise-exponential approximation.
pub fn anderson_darling_normal(sample: &[f64]) -> Result<AndersonDarling> {
    let n = sample.len();
    if n < 8 {
        return Err(Error::Demand(format!(
            "Anderson-Darling needs at least 8 observations, got {n}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Demand(
            "Anderson-Darling requires finite observations".into(),
        ));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Demand(
            "Anderson-Darling is undefined for tied observations".into(),
        ));
    }

    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let ss: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();

    let phi = |x: f64| 0.5 * erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2));
    let eps = 1e-15;
    let mut sum = 0.0;
    for i in 0..n {
        let lo = phi(sorted[i]).clamp(eps, 1.0 - eps);
        let hi = phi(sorted[n - 1 - i]).clamp(eps, 1.0 - eps);
        sum += (2 * (i + 1) - 1) as f64 * (lo.ln() + (1.0 - hi).ln());
    }
    let a2 = -nf - sum / nf;
    let a2_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));

    Ok(AndersonDarling {
        statistic: a2,
        p_value: ad_p_value(a2_star),
    })
}

/// Anderson-Darling test over the demand column of a series.
pub fn anderson_darling(series: &DemandSeries) -> Result<AndersonDarling> {
    anderson_darling_normal(&series.demands())
}

// D'Agostino & Stephens piecewise-exponential approximation for the
// corrected statistic.
fn ad_p_value(a2_star: f64) -> f64 {
    let a = a2_star;
    let p = if a < 0.2 {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    } else if a < 0.34 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else if a < 0.6 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a < 10.0 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else {
        0.0
    };
    p.clamp(0.0, 1.0)
}

/// P(demand > threshold) under the fit, via the complementary error
/// function (absolute accuracy well below 1e-7).
pub fn tail_probability(fit: &NormalFit, threshold_kg: f64) -> f64 {
    let z = (threshold_kg - fit.mu()) / fit.sigma();
    0.5 * erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Coefficient of variation sigma / mu.
pub fn coefficient_of_variation(fit: &NormalFit) -> Result<f64> {
    if fit.mu() == 0.0 {
        return Err(Error::Demand(
            "coefficient of variation undefined for zero mean".into(),
        ));
    }
    Ok(fit.sigma() / fit.mu())
}

/// The twelve 2013 monthly demands (kg) used throughout the test suite and
/// shipped as sample data.
pub const MONTHLY_DEMANDS_2013: [f64; 12] = [
    435_536.0, 342_621.0, 294_082.0, 326_342.0, 410_814.0, 377_721.0, 351_338.0, 491_975.0,
    424_908.0, 535_150.0, 343_411.0, 430_795.0,
];
