//! Roughness and multifractality of realized volatility.
//!
//! The crate covers the full chain from exchange tick dumps to scaling
//! exponents:
//!
//! * [`market_data`] parses `timestamp,price[,amount]` dumps and resamples
//!   them onto a Δ-minute previous-tick grid, one UTC day at a time.
//! * [`realized_volatility`] turns intraday returns into daily realized
//!   variance, log-RV increments and standardized daily returns.
//! * [`finite_sample`] holds the closed-form law of standardized returns at
//!   finite `n = 1440/Δ`.
//! * [`mfdfa`] implements multifractal detrended fluctuation analysis and
//!   generalized Hurst exponent extraction.
//! * [`multifractal_metrics`] derives Δh(k) and the Taylor slope B₁.
//! * [`scaling`] fits `H(Δ) = H₀·n/(n+a)` across a sampling-period sweep.
//! * [`synthetic`] provides seeded fGn, binomial-cascade and Gaussian
//!   intraday generators used as independent oracles.
//! * [`pipeline`] runs rolling windows over all of the above and emits
//!   JSON/CSV reports.

// NaN must fail range checks, so `!(x > 0.0)` is used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod finite_sample;
pub mod market_data;
pub mod mfdfa;
pub mod multifractal_metrics;
pub mod pipeline;
pub mod realized_volatility;
pub mod scaling;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};

/// Minutes in one UTC day.
pub const MINUTES_PER_DAY: u32 = 1440;

/// Number of intraday samples `n = 1440/Δ`, or an argument error when Δ does
/// not divide a day.
pub fn samples_per_day(delta_minutes: u32) -> Result<u32> {
    if delta_minutes == 0 || !MINUTES_PER_DAY.is_multiple_of(delta_minutes) {
        return Err(Error::arg(format!(
            "sampling period {delta_minutes} min does not divide 1440"
        )));
    }
    Ok(MINUTES_PER_DAY / delta_minutes)
}

/// All 36 divisors of 1440, ascending.
pub fn day_divisors() -> Vec<u32> {
    (1..=MINUTES_PER_DAY)
        .filter(|d| MINUTES_PER_DAY.is_multiple_of(*d))
        .collect()
}
