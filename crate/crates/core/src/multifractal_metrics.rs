//! Strength of multifractality from a generalized Hurst exponent curve.

use serde::{Deserialize, Serialize};

use crate::mfdfa::GheCurve;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultifractalStrength {
    pub k: f64,
    /// `h(−k) − h(k)`.
    pub delta_h: f64,
    /// Linear Taylor coefficient of `h(q)` around `q = 0`.
    pub b1: f64,
    /// Constant Taylor coefficient, symmetric estimate.
    pub b0: f64,
}

fn lookup(curve: &GheCurve, q: f64) -> Result<f64> {
    curve
        .h(q)
        .ok_or_else(|| Error::arg(format!("GHE curve has no point at q = {q}")))
}

/// `Δh(k) = h(−k) − h(k)`; both q values must be on the curve's grid.
pub fn delta_h(curve: &GheCurve, k: f64) -> Result<f64> {
    let lo = lookup(curve, -k)?;
    let hi = lookup(curve, k)?;
    Ok(lo - hi)
}

/// `(B₀, B₁)` with `B₁ = −Δh(k)/(2k)` and `B₀ = (h(−k) + h(k))/2`.
pub fn taylor_b1(curve: &GheCurve, k: f64) -> Result<(f64, f64)> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::arg(format!("k must be positive, got {k}")));
    }
    let lo = lookup(curve, -k)?;
    let hi = lookup(curve, k)?;
    Ok(((lo + hi) / 2.0, -(lo - hi) / (2.0 * k)))
}

pub fn strength(curve: &GheCurve, k: f64) -> Result<MultifractalStrength> {
    let (b0, b1) = taylor_b1(curve, k)?;
    Ok(MultifractalStrength {
        k,
        delta_h: delta_h(curve, k)?,
        b1,
        b0,
    })
}
