//! Daily realized variance, log-RV increments and standardized daily returns.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::market_data::IntradayReturnGrid;
use crate::{samples_per_day, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvPoint {
    pub date: NaiveDate,
    /// Sum of squared intraday returns.
    pub rv: f64,
    /// Sum of intraday returns (close-to-close on the grid).
    pub daily_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RvSeries {
    pub delta_minutes: u32,
    pub points: Vec<RvPoint>,
}

impl RvSeries {
    /// Validates `rv ≥ 0` and strictly increasing dates.
    pub fn new(delta_minutes: u32, points: Vec<RvPoint>) -> Result<Self> {
        samples_per_day(delta_minutes)?;
        if let Some(p) = points.iter().find(|p| !(p.rv >= 0.0 && p.rv.is_finite())) {
            return Err(Error::arg(format!("invalid RV {} on {}", p.rv, p.date)));
        }
        if points.windows(2).any(|w| w[1].date <= w[0].date) {
            return Err(Error::arg("RV dates must be strictly increasing"));
        }
        Ok(Self {
            delta_minutes,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with `from <= date < to`.
    pub fn slice_dates(&self, from: NaiveDate, to: NaiveDate) -> RvSeries {
        let lo = self.points.partition_point(|p| p.date < from);
        let hi = self.points.partition_point(|p| p.date < to);
        RvSeries {
            delta_minutes: self.delta_minutes,
            points: self.points[lo..hi.max(lo)].to_vec(),
        }
    }

    /// CSV `date,rv,daily_return`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "date,rv,daily_return")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.date, p.rv, p.daily_return)?;
        }
        Ok(())
    }
}

/// `rv = Σ r²`, `daily_return = Σ r` per grid day.
pub fn compute_daily_rv(returns: &IntradayReturnGrid) -> RvSeries {
    let points = returns
        .days
        .iter()
        .map(|day| RvPoint {
            date: day.date,
            rv: day.returns.iter().map(|r| r * r).sum(),
            daily_return: day.returns.iter().sum(),
        })
        .collect();
    RvSeries {
        delta_minutes: returns.delta_minutes,
        points,
    }
}

/// Treatment of days with zero realized variance before taking logs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Remove the day and both increments that touch it.
    #[default]
    Drop,
    /// Replace zero RV by the given floor.
    Floor(f64),
}

impl ZeroPolicy {
    pub const DEFAULT_FLOOR: f64 = 1e-12;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogIncrementSeries {
    /// `V_t = ln RV_t − ln RV_{t−1}`.
    pub values: Vec<f64>,
    /// Date of the later day of each increment.
    pub dates: Vec<NaiveDate>,
    /// Zero-RV days removed under [`ZeroPolicy::Drop`].
    pub dropped_days: Vec<NaiveDate>,
}

impl LogIncrementSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV `date,V`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "date,V")?;
        for (d, v) in self.dates.iter().zip(&self.values) {
            writeln!(out, "{d},{v}")?;
        }
        Ok(())
    }
}

/// Log-RV increments between adjacent entries of the series.
pub fn log_increments(rv: &RvSeries, zero_policy: ZeroPolicy) -> Result<LogIncrementSeries> {
    if rv.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 RV days, got {}",
            rv.len()
        )));
    }
    let logs: Vec<Option<f64>> = rv
        .points
        .iter()
        .map(|p| match zero_policy {
            _ if p.rv > 0.0 => Some(p.rv.ln()),
            ZeroPolicy::Drop => None,
            ZeroPolicy::Floor(eps) => Some(eps.ln()),
        })
        .collect();
    let usable = logs.iter().filter(|l| l.is_some()).count();
    if usable < 2 {
        return Err(Error::InsufficientData(format!(
            "only {usable} day(s) with positive RV"
        )));
    }
    if let ZeroPolicy::Floor(eps) = zero_policy {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::arg(format!("RV floor must be positive, got {eps}")));
        }
    }

    let mut out = LogIncrementSeries {
        values: Vec::with_capacity(rv.len() - 1),
        dates: Vec::with_capacity(rv.len() - 1),
        dropped_days: Vec::new(),
    };
    for (p, l) in rv.points.iter().zip(&logs) {
        if l.is_none() {
            out.dropped_days.push(p.date);
        }
    }
    for (i, w) in logs.windows(2).enumerate() {
        if let (Some(prev), Some(cur)) = (w[0], w[1]) {
            out.values.push(cur - prev);
            out.dates.push(rv.points[i + 1].date);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedReturns {
    /// `r_t / √RV_t`.
    pub values: Vec<f64>,
    /// Intraday samples per day.
    pub n: u32,
}

/// `r̄_t = r_t / √RV_t`. Every day must have positive RV.
pub fn standardize_returns(rv: &RvSeries) -> Result<StandardizedReturns> {
    let n = samples_per_day(rv.delta_minutes)?;
    let bound = f64::from(n).sqrt();
    let mut values = Vec::with_capacity(rv.len());
    for p in &rv.points {
        if !(p.rv > 0.0) {
            return Err(Error::Domain(format!(
                "zero realized variance on {}; filter such days first",
                p.date
            )));
        }
        let r = p.daily_return / p.rv.sqrt();
        // Cauchy-Schwarz bound; allow rounding slack only.
        if r.abs() > bound * (1.0 + 1e-12) {
            return Err(Error::Numeric(format!(
                "standardized return {r} on {} exceeds √n = {bound}",
                p.date
            )));
        }
        values.push(r);
    }
    Ok(StandardizedReturns { values, n })
}
